#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

namespace pisim {

enum class LayerKind { Linear, Relu };
enum class Party { Client, Server };
enum class ProtocolVariant { ServerGarbler, ClientGarbler };

inline const char* to_string(Party p) {
    return p == Party::Client ? "client" : "server";
}
inline const char* to_string(ProtocolVariant v) {
    return v == ProtocolVariant::ServerGarbler ? "server_garbler" : "client_garbler";
}

/// One layer of a network profile. Linear layers carry the calibrated HE
/// evaluation latency (reference server) and the encrypted-share traffic for
/// their offline exchange; ReLU layers carry the scalar gate count.
struct LayerSpec {
    std::size_t index = 0;
    LayerKind kind = LayerKind::Linear;
    // linear
    double he_latency_ref_s = 0.0;
    double share_bytes = 0.0;
    std::uint64_t out_elements = 0;
    // relu
    std::uint64_t relu_count = 0;
};

struct NetworkProfile {
    std::string name;
    double input_bytes = 0.0;  // client input share uploaded online
    std::vector<LayerSpec> layers;
    // declared totals; validate_network() recomputes and cross-checks
    std::uint64_t total_relus = 0;
    std::uint64_t n_linear = 0;

    std::uint64_t computed_total_relus() const {
        std::uint64_t n = 0;
        for (const auto& l : layers)
            if (l.kind == LayerKind::Relu) n += l.relu_count;
        return n;
    }
    std::uint64_t computed_n_linear() const {
        std::uint64_t n = 0;
        for (const auto& l : layers)
            if (l.kind == LayerKind::Linear) ++n;
        return n;
    }
    /// Activation elements across linear layers (randomness-share sizing).
    std::uint64_t total_elements() const {
        std::uint64_t n = 0;
        for (const auto& l : layers)
            if (l.kind == LayerKind::Linear) n += l.out_elements;
        return n;
    }
    /// Per-linear-layer HE latencies in layer order.
    std::vector<double> he_vector() const {
        std::vector<double> v;
        for (const auto& l : layers)
            if (l.kind == LayerKind::Linear) v.push_back(l.he_latency_ref_s);
        return v;
    }
};

/// Dimensionless slowdown multipliers vs the reference (calibration) server.
struct ComputeScales {
    double gc_garble = 1.0;
    double gc_eval = 1.0;
    double he = 1.0;
    double ss = 1.0;
};

struct DeviceProfile {
    Party role = Party::Client;
    ComputeScales compute_scale;
    double storage_capacity_bytes = 0.0;
};

struct LinkProfile {
    double total_bandwidth_bps = 1e9;
    double upload_fraction = 0.5;
    double slot_granularity = 0.001;
    double per_message_overhead_s = 0.0;

    double upload_bps() const { return total_bandwidth_bps * upload_fraction; }
    double download_bps() const { return total_bandwidth_bps * (1.0 - upload_fraction); }
};

/// Per-primitive calibration constants, all on the reference server where a
/// time unit is involved.
struct CostConstants {
    double gc_bytes_per_relu = 18200.0;
    double garbler_encoding_bytes_per_relu = 3500.0;
    double gc_garble_s_per_relu_ref = 0.0;
    double gc_eval_s_per_relu_ref = 0.0;
    double ot_offline_bytes_per_relu = 0.0;
    double ot_online_bytes_per_relu = 0.0;
    double label_bytes_per_relu = 0.0;
    double ss_online_s = 0.0;
    double randomness_bytes_per_element = 8.0;
};

enum class WsaMode { EvenSplit, Fixed, Optimized };

struct ProtocolConfig {
    ProtocolVariant variant = ProtocolVariant::ServerGarbler;
    bool lphe_enabled = false;
    WsaMode wsa_mode = WsaMode::EvenSplit;
    double fixed_upload_fraction = 0.5;  // used when wsa_mode == Fixed
};

// ---------------------------------------------------------------------------

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Recomputes totals and checks every NetworkProfile invariant. Report-based:
/// never throws, one entry per violated invariant.
inline ValidationReport validate_network(const NetworkProfile& net) {
    ValidationReport rep;
    auto fail = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

    const std::uint64_t relus = net.computed_total_relus();
    const std::uint64_t nlin = net.computed_n_linear();
    if (nlin == 0) fail("n_linear > 0 failed");
    if (relus == 0) fail("total_relus > 0 failed");
    if (net.total_relus != relus) {
        std::ostringstream os;
        os << "declared total_relus " << net.total_relus
           << " != computed " << relus;
        fail(os.str());
    }
    if (net.n_linear != nlin) {
        std::ostringstream os;
        os << "declared n_linear " << net.n_linear << " != computed " << nlin;
        fail(os.str());
    }
    if (!net.layers.empty() && net.layers.front().kind != LayerKind::Linear)
        fail("first layer must be linear");
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        if (l.index != i) {
            std::ostringstream os;
            os << "layer " << i << " carries index " << l.index;
            fail(os.str());
        }
        if (l.kind == LayerKind::Linear) {
            if (l.he_latency_ref_s < 0) {
                std::ostringstream os;
                os << "layer " << i << ": he_latency_ref_s >= 0 failed";
                fail(os.str());
            }
        } else {
            if (l.relu_count < 1) {
                std::ostringstream os;
                os << "layer " << i << ": relu_count >= 1 failed";
                fail(os.str());
            }
            if (i > 0 && net.layers[i - 1].kind == LayerKind::Relu) {
                std::ostringstream os;
                os << "layer " << i << ": consecutive relu layers";
                fail(os.str());
            }
        }
    }
    return rep;
}

struct StorageCosts {
    double client_bytes = 0.0;
    double server_bytes = 0.0;
};

/// Offline storage held by each party for one buffered pre-compute.
/// The garbled circuits sit with the evaluator, the input encodings with the
/// garbler, and each party keeps its randomness shares. Swapping the variant
/// swaps exactly the gc/encoding terms between the parties.
inline StorageCosts storage_per_inference(const NetworkProfile& net,
                                          const CostConstants& c,
                                          ProtocolVariant variant) {
    const double relus = static_cast<double>(net.computed_total_relus());
    const double elems = static_cast<double>(net.total_elements());
    const double gc = relus * c.gc_bytes_per_relu;
    const double enc = relus * c.garbler_encoding_bytes_per_relu;
    const double rand = elems * c.randomness_bytes_per_element;
    StorageCosts s;
    if (variant == ProtocolVariant::ServerGarbler) {
        s.client_bytes = gc + rand;   // client evaluates and stores the GCs
        s.server_bytes = enc + rand;
    } else {
        s.client_bytes = enc + rand;  // client garbles, server stores the GCs
        s.server_bytes = gc + rand;
    }
    return s;
}

}  // namespace pisim
