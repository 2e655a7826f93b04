#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pisim/model.hpp"

namespace pisim {

enum class Phase { Offline, Online };
enum class Direction { Upload, Download };
enum class Primitive { HE, GCGarble, GCEval, SS };

inline const char* to_string(Phase p) { return p == Phase::Offline ? "offline" : "online"; }
inline const char* to_string(Direction d) { return d == Direction::Upload ? "up" : "down"; }
inline const char* to_string(Primitive p) {
    switch (p) {
        case Primitive::HE: return "he";
        case Primitive::GCGarble: return "gc_garble";
        case Primitive::GCEval: return "gc_eval";
        default: return "ss";
    }
}

struct ComputeStep {
    Party party = Party::Server;
    Primitive primitive = Primitive::HE;
    double seconds_ref = 0.0;          // reference-server seconds (sum for HE)
    std::vector<double> per_layer_s;   // HE only: per-linear-layer latencies
};

struct TransferStep {
    Direction direction = Direction::Upload;
    double bytes = 0.0;
    std::string tag;  // gc_material | ot_offline | ot_online | he_shares | labels | input_share
};

struct Step {
    Phase phase = Phase::Offline;
    std::variant<ComputeStep, TransferStep> body;

    bool is_transfer() const { return std::holds_alternative<TransferStep>(body); }
    const TransferStep& transfer() const { return std::get<TransferStep>(body); }
    const ComputeStep& compute() const { return std::get<ComputeStep>(body); }
};

/// Phase-tagged step sequence for one inference: pre-compute plus serve.
/// Steps are ordered; all offline steps precede all online steps.
struct ProtocolTrace {
    std::string network_name;
    ProtocolVariant variant = ProtocolVariant::ServerGarbler;
    std::vector<Step> steps;
};

namespace detail {
// Two-message OT exchange: the receiver's extension message carries one third
// of the bytes, the sender's ciphertexts two thirds.
inline constexpr double kOtReceiverShare = 1.0 / 3.0;
}  // namespace detail

/// Builds the message/compute schedule for one inference under `variant`.
/// Serialization order within a phase is fixed: per-layer HE exchanges first,
/// then garbling and GC material, then the OT exchange; online runs input
/// share, label exchanges around a single evaluation group, then the share
/// reconstruction arithmetic.
inline ProtocolTrace build_trace(const NetworkProfile& net,
                                 const CostConstants& c,
                                 ProtocolVariant variant) {
    ProtocolTrace tr;
    tr.network_name = net.name;
    tr.variant = variant;
    const bool sg = variant == ProtocolVariant::ServerGarbler;
    const double relus = static_cast<double>(net.computed_total_relus());
    const Party garbler = sg ? Party::Server : Party::Client;
    const Party evaluator = sg ? Party::Client : Party::Server;

    auto transfer = [&tr](Phase ph, Direction d, double bytes, const char* tag) {
        if (bytes <= 0.0) return;
        tr.steps.push_back({ph, TransferStep{d, bytes, tag}});
    };
    auto compute = [&tr](Phase ph, Party p, Primitive prim, double s,
                         std::vector<double> per_layer = {}) {
        tr.steps.push_back({ph, ComputeStep{p, prim, s, std::move(per_layer)}});
    };

    // --- offline ---
    for (const auto& l : net.layers)
        if (l.kind == LayerKind::Linear)
            transfer(Phase::Offline, Direction::Upload, l.share_bytes, "he_shares");
    std::vector<double> he = net.he_vector();
    double he_sum = 0.0;
    for (double v : he) he_sum += v;
    compute(Phase::Offline, Party::Server, Primitive::HE, he_sum, he);
    for (const auto& l : net.layers)
        if (l.kind == LayerKind::Linear)
            transfer(Phase::Offline, Direction::Download, l.share_bytes, "he_shares");

    compute(Phase::Offline, garbler, Primitive::GCGarble,
            relus * c.gc_garble_s_per_relu_ref);
    transfer(Phase::Offline, sg ? Direction::Download : Direction::Upload,
             relus * c.gc_bytes_per_relu, "gc_material");

    if (sg) {
        // evaluator-input labels move offline; the receiver is the client
        const double ot = relus * c.ot_offline_bytes_per_relu;
        transfer(Phase::Offline, Direction::Upload, ot * detail::kOtReceiverShare,
                 "ot_offline");
        transfer(Phase::Offline, Direction::Download, ot * (1.0 - detail::kOtReceiverShare),
                 "ot_offline");
    }

    // --- online ---
    transfer(Phase::Online, Direction::Upload, net.input_bytes, "input_share");
    if (!sg) {
        // evaluator (server) obtains its input-dependent labels via online OT
        const double ot = relus * c.ot_online_bytes_per_relu;
        transfer(Phase::Online, Direction::Download, ot * detail::kOtReceiverShare,
                 "ot_online");
        transfer(Phase::Online, Direction::Upload, ot * (1.0 - detail::kOtReceiverShare),
                 "ot_online");
    }
    // the non-evaluating party sends its labels, coalesced per ReLU layer
    for (const auto& l : net.layers)
        if (l.kind == LayerKind::Relu)
            transfer(Phase::Online, sg ? Direction::Download : Direction::Upload,
                     static_cast<double>(l.relu_count) * c.label_bytes_per_relu, "labels");
    compute(Phase::Online, evaluator, Primitive::GCEval,
            relus * c.gc_eval_s_per_relu_ref);
    // output labels return to the garbler for decoding
    for (const auto& l : net.layers)
        if (l.kind == LayerKind::Relu)
            transfer(Phase::Online, sg ? Direction::Upload : Direction::Download,
                     static_cast<double>(l.relu_count) * c.label_bytes_per_relu, "labels");
    compute(Phase::Online, Party::Server, Primitive::SS, c.ss_online_s);
    return tr;
}

/// Sum of transfer bytes matching the given filters (empty = match all).
inline double trace_bytes(const ProtocolTrace& tr,
                          std::optional<Phase> phase = {},
                          std::optional<Direction> dir = {},
                          std::optional<std::string> tag = {}) {
    double total = 0.0;
    for (const auto& s : tr.steps) {
        if (!s.is_transfer()) continue;
        if (phase && s.phase != *phase) continue;
        const auto& t = s.transfer();
        if (dir && t.direction != *dir) continue;
        if (tag && t.tag != *tag) continue;
        total += t.bytes;
    }
    return total;
}

/// Step-per-line text dump for debugging and golden tests.
inline std::string dump(const ProtocolTrace& tr) {
    std::ostringstream os;
    os << "trace " << tr.network_name << " " << to_string(tr.variant) << "\n";
    for (const auto& s : tr.steps) {
        os << to_string(s.phase) << " ";
        if (s.is_transfer()) {
            const auto& t = s.transfer();
            os << "transfer " << to_string(t.direction) << " " << t.tag
               << " bytes=" << t.bytes;
        } else {
            const auto& c = s.compute();
            os << "compute " << to_string(c.party) << " " << to_string(c.primitive)
               << " ref_s=" << c.seconds_ref;
            if (!c.per_layer_s.empty())
                os << " layers=" << c.per_layer_s.size();
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace pisim
