#pragma once

#include <algorithm>
#include <stdexcept>

#include "pisim/model.hpp"
#include "pisim/trace.hpp"

namespace pisim {

struct PrimitiveSeconds {
    double he = 0.0;
    double gc_garble = 0.0;
    double gc_eval = 0.0;
    double ss = 0.0;

    double total() const { return he + gc_garble + gc_eval + ss; }
    double& of(Primitive p) {
        switch (p) {
            case Primitive::HE: return he;
            case Primitive::GCGarble: return gc_garble;
            case Primitive::GCEval: return gc_eval;
            default: return ss;
        }
    }
};

struct ComputeLatency {
    PrimitiveSeconds offline_client, offline_server, online_client, online_server;

    PrimitiveSeconds& at(Phase ph, Party p) {
        if (ph == Phase::Offline)
            return p == Party::Client ? offline_client : offline_server;
        return p == Party::Client ? online_client : online_server;
    }
    const PrimitiveSeconds& at(Phase ph, Party p) const {
        return const_cast<ComputeLatency*>(this)->at(ph, p);
    }
    double phase_total(Phase ph) const {
        return at(ph, Party::Client).total() + at(ph, Party::Server).total();
    }
};

/// Scales every compute step by the executing party's slowdown. With LPHE the
/// HE group costs the longest per-layer latency instead of the sum; every
/// linear layer runs on its own worker.
inline ComputeLatency compute_latency(const ProtocolTrace& tr,
                                      const DeviceProfile& client,
                                      const DeviceProfile& server,
                                      bool lphe) {
    ComputeLatency out;
    for (const auto& s : tr.steps) {
        if (s.is_transfer()) continue;
        const auto& c = s.compute();
        const ComputeScales& sc =
            c.party == Party::Client ? client.compute_scale : server.compute_scale;
        double ref = c.seconds_ref;
        double scale = 1.0;
        switch (c.primitive) {
            case Primitive::HE: {
                if (lphe) {
                    if (c.per_layer_s.empty() && c.seconds_ref > 0.0)
                        throw std::runtime_error("LPHE requires per-layer HE costs");
                    ref = 0.0;
                    for (double v : c.per_layer_s) ref = std::max(ref, v);
                }
                scale = sc.he;
                break;
            }
            case Primitive::GCGarble: scale = sc.gc_garble; break;
            case Primitive::GCEval: scale = sc.gc_eval; break;
            case Primitive::SS: scale = sc.ss; break;
        }
        out.at(s.phase, c.party).of(c.primitive) += ref * scale;
    }
    return out;
}

/// Duration of a single transfer under the link split.
inline double transfer_seconds(const TransferStep& t, const LinkProfile& link) {
    const double bw =
        t.direction == Direction::Upload ? link.upload_bps() : link.download_bps();
    return t.bytes * 8.0 / bw + link.per_message_overhead_s;
}

struct DirectionalComm {
    double up_s = 0.0;
    double down_s = 0.0;
    double up_bytes = 0.0;
    double down_bytes = 0.0;
};

struct CommLatency {
    DirectionalComm offline, online;
    bool overlap = false;

    const DirectionalComm& at(Phase ph) const {
        return ph == Phase::Offline ? offline : online;
    }
    double phase_total(Phase ph) const {
        const auto& d = at(ph);
        return overlap ? std::max(d.up_s, d.down_s) : d.up_s + d.down_s;
    }
    double total_s() const { return phase_total(Phase::Offline) + phase_total(Phase::Online); }
    double total_bytes() const {
        return offline.up_bytes + offline.down_bytes + online.up_bytes + online.down_bytes;
    }
};

/// Transfers serialize in trace order; opposite directions do not overlap
/// unless `overlap` is set, in which case each direction forms its own queue
/// and a phase costs the longer of the two.
inline CommLatency comm_latency(const ProtocolTrace& tr, const LinkProfile& link,
                                bool overlap = false) {
    CommLatency out;
    out.overlap = overlap;
    for (const auto& s : tr.steps) {
        if (!s.is_transfer()) continue;
        const auto& t = s.transfer();
        DirectionalComm& d = s.phase == Phase::Offline ? out.offline : out.online;
        const double secs = transfer_seconds(t, link);
        if (t.direction == Direction::Upload) {
            d.up_s += secs;
            d.up_bytes += t.bytes;
        } else {
            d.down_s += secs;
            d.down_bytes += t.bytes;
        }
    }
    return out;
}

/// Aggregated latency/storage report for one inference.
struct PhaseCosts {
    ComputeLatency compute;
    CommLatency comm;
    StorageCosts storage;
    double upload_fraction_used = 0.5;

    double phase_total(Phase ph) const {
        return compute.phase_total(ph) + comm.phase_total(ph);
    }
    double offline_s() const { return phase_total(Phase::Offline); }
    double online_s() const { return phase_total(Phase::Online); }
    double total_s() const { return offline_s() + online_s(); }
    // Table-style rollups across parties
    double gc_s(Phase ph) const {
        return compute.at(ph, Party::Client).gc_garble + compute.at(ph, Party::Client).gc_eval +
               compute.at(ph, Party::Server).gc_garble + compute.at(ph, Party::Server).gc_eval;
    }
    double he_s(Phase ph) const {
        return compute.at(ph, Party::Client).he + compute.at(ph, Party::Server).he;
    }
    double ss_s(Phase ph) const {
        return compute.at(ph, Party::Client).ss + compute.at(ph, Party::Server).ss;
    }
};

/// What-if acceleration factors; all act multiplicatively and commute.
struct WhatIfFactors {
    double gc_speedup = 1.0;
    double he_speedup = 1.0;
    double bandwidth_multiplier = 1.0;
    double relu_reduction = 1.0;

    bool valid() const {
        return gc_speedup >= 1.0 && he_speedup >= 1.0 &&
               bandwidth_multiplier >= 1.0 && relu_reduction >= 1.0;
    }
    /// Composition multiplies factors component-wise (bitwise commutative).
    WhatIfFactors compose(const WhatIfFactors& o) const {
        return {gc_speedup * o.gc_speedup, he_speedup * o.he_speedup,
                bandwidth_multiplier * o.bandwidth_multiplier,
                relu_reduction * o.relu_reduction};
    }
};

}  // namespace pisim
