#pragma once

#include <stdexcept>

#include "pisim/cost.hpp"
#include "pisim/wsa.hpp"

namespace pisim {

/// Everything needed to cost one protocol configuration end to end.
struct Scenario {
    NetworkProfile network;
    CostConstants constants;
    ProtocolConfig protocol;
    DeviceProfile client;
    DeviceProfile server;
    LinkProfile link;
};

/// The upload fraction the configured slot-allocation mode resolves to.
inline double resolve_upload_fraction(const Scenario& sc, const ProtocolTrace& tr) {
    switch (sc.protocol.wsa_mode) {
        case WsaMode::EvenSplit:
            return 0.5;
        case WsaMode::Fixed:
            if (!(sc.protocol.fixed_upload_fraction > 0.0 &&
                  sc.protocol.fixed_upload_fraction < 1.0))
                throw std::invalid_argument("fixed upload fraction must lie in (0,1)");
            return sc.protocol.fixed_upload_fraction;
        case WsaMode::Optimized:
        default:
            return optimize_split(tr, sc.link.total_bandwidth_bps,
                                  sc.link.slot_granularity,
                                  sc.link.per_message_overhead_s)
                .upload_fraction;
    }
}

inline LinkProfile resolved_link(const Scenario& sc, const ProtocolTrace& tr) {
    LinkProfile link = sc.link;
    link.upload_fraction = resolve_upload_fraction(sc, tr);
    return link;
}

/// One-inference latency/storage report: trace construction, compute and
/// communication latency, and per-party storage in a single pass.
inline PhaseCosts phase_costs(const Scenario& sc, bool overlap = false) {
    const ProtocolTrace tr = build_trace(sc.network, sc.constants, sc.protocol.variant);
    const LinkProfile link = resolved_link(sc, tr);
    PhaseCosts pc;
    pc.compute = compute_latency(tr, sc.client, sc.server, sc.protocol.lphe_enabled);
    pc.comm = comm_latency(tr, link, overlap);
    pc.storage = storage_per_inference(sc.network, sc.constants, sc.protocol.variant);
    pc.upload_fraction_used = link.upload_fraction;
    return pc;
}

/// Applies acceleration factors onto the scenario's inputs. GC factors divide
/// the per-gate times, HE divides every per-layer latency (the LPHE maximum
/// shrinks proportionally), bandwidth multiplies the link, and the ReLU
/// reduction divides every per-ReLU byte and time constant.
inline Scenario apply_factors(Scenario sc, const WhatIfFactors& f) {
    if (!f.valid()) throw std::invalid_argument("what-if factors must be >= 1");
    CostConstants& c = sc.constants;
    c.gc_garble_s_per_relu_ref /= f.gc_speedup * f.relu_reduction;
    c.gc_eval_s_per_relu_ref /= f.gc_speedup * f.relu_reduction;
    c.gc_bytes_per_relu /= f.relu_reduction;
    c.garbler_encoding_bytes_per_relu /= f.relu_reduction;
    c.ot_offline_bytes_per_relu /= f.relu_reduction;
    c.ot_online_bytes_per_relu /= f.relu_reduction;
    c.label_bytes_per_relu /= f.relu_reduction;
    for (auto& l : sc.network.layers)
        if (l.kind == LayerKind::Linear) l.he_latency_ref_s /= f.he_speedup;
    sc.link.total_bandwidth_bps *= f.bandwidth_multiplier;
    return sc;
}

inline PhaseCosts apply_whatif(const Scenario& sc, const WhatIfFactors& f) {
    return phase_costs(apply_factors(sc, f));
}

}  // namespace pisim
