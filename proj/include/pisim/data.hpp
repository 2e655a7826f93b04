#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "pisim/sim.hpp"
#include "pisim/textkv.hpp"

namespace pisim {

inline NetworkProfile load_network(const std::string& path) {
    TextKv kv = TextKv::parse_file(path);
    NetworkProfile net;
    net.name = kv.get_string("name");
    net.input_bytes = kv.get_number("input_bytes");
    net.total_relus = static_cast<std::uint64_t>(kv.get_number("total_relus"));
    net.n_linear = static_cast<std::uint64_t>(kv.get_number("n_linear"));
    const auto n_layers = static_cast<std::size_t>(kv.get_number("n_layers"));
    for (std::size_t i = 0; i < n_layers; ++i) {
        std::ostringstream pre;
        pre << "layer." << i << ".";
        LayerSpec l;
        l.index = i;
        const std::string kind = kv.get_string(pre.str() + "kind");
        if (kind == "linear") {
            l.kind = LayerKind::Linear;
            l.he_latency_ref_s = kv.get_number(pre.str() + "he_latency_ref_s");
            l.share_bytes = kv.get_number(pre.str() + "share_bytes");
            l.out_elements =
                static_cast<std::uint64_t>(kv.get_number_or(pre.str() + "out_elements", 0));
        } else if (kind == "relu") {
            l.kind = LayerKind::Relu;
            l.relu_count = static_cast<std::uint64_t>(kv.get_number(pre.str() + "relu_count"));
        } else {
            throw std::runtime_error(path + ": layer." + std::to_string(i) +
                                     ".kind must be linear|relu, got '" + kind + "'");
        }
        net.layers.push_back(l);
    }
    kv.reject_unconsumed();
    return net;
}

inline CostConstants load_constants(const std::string& path) {
    TextKv kv = TextKv::parse_file(path);
    CostConstants c;
    c.gc_bytes_per_relu = kv.get_number("gc_bytes_per_relu");
    c.garbler_encoding_bytes_per_relu = kv.get_number("garbler_encoding_bytes_per_relu");
    c.gc_garble_s_per_relu_ref = kv.get_number("gc_garble_s_per_relu_ref");
    c.gc_eval_s_per_relu_ref = kv.get_number("gc_eval_s_per_relu_ref");
    c.ot_offline_bytes_per_relu = kv.get_number("ot_offline_bytes_per_relu");
    c.ot_online_bytes_per_relu = kv.get_number("ot_online_bytes_per_relu");
    c.label_bytes_per_relu = kv.get_number("label_bytes_per_relu");
    c.ss_online_s = kv.get_number("ss_online_s");
    c.randomness_bytes_per_element = kv.get_number("randomness_bytes_per_element");
    kv.reject_unconsumed();
    if (c.gc_bytes_per_relu <= c.garbler_encoding_bytes_per_relu)
        throw std::runtime_error(path + ": gc_bytes_per_relu must exceed "
                                        "garbler_encoding_bytes_per_relu");
    for (double v : {c.gc_bytes_per_relu, c.garbler_encoding_bytes_per_relu,
                     c.gc_garble_s_per_relu_ref, c.gc_eval_s_per_relu_ref,
                     c.ot_offline_bytes_per_relu, c.ot_online_bytes_per_relu,
                     c.label_bytes_per_relu, c.ss_online_s,
                     c.randomness_bytes_per_element})
        if (v < 0.0) throw std::runtime_error(path + ": cost constants must be >= 0");
    return c;
}

inline DeviceProfile load_device(const std::string& path) {
    TextKv kv = TextKv::parse_file(path);
    DeviceProfile d;
    const std::string role = kv.get_string("role");
    if (role == "client") d.role = Party::Client;
    else if (role == "server") d.role = Party::Server;
    else throw std::runtime_error(path + ": role must be client|server");
    d.compute_scale.gc_garble = kv.get_number("compute_scale.gc_garble");
    d.compute_scale.gc_eval = kv.get_number("compute_scale.gc_eval");
    d.compute_scale.he = kv.get_number("compute_scale.he");
    d.compute_scale.ss = kv.get_number("compute_scale.ss");
    d.storage_capacity_bytes = kv.get_number("storage_capacity_bytes");
    kv.reject_unconsumed();
    for (double v : {d.compute_scale.gc_garble, d.compute_scale.gc_eval,
                     d.compute_scale.he, d.compute_scale.ss})
        if (v <= 0.0) throw std::runtime_error(path + ": compute_scale entries must be > 0");
    if (d.storage_capacity_bytes < 0.0)
        throw std::runtime_error(path + ": storage_capacity_bytes must be >= 0");
    return d;
}

/// One scenario of a comparison sweep: protocol preset plus a client storage
/// budget, e.g. "sg:64e9" or "cg_opt:16e9".
struct ScenarioSpec {
    std::string label;
    ProtocolVariant variant = ProtocolVariant::ServerGarbler;
    bool lphe = false;
    WsaMode wsa = WsaMode::EvenSplit;
    double client_storage_bytes = 0.0;  // 0 keeps the device default
};

struct LadderRung {
    std::string label;
    WhatIfFactors delta;  // composed cumulatively in order
};

/// Fully resolved experiment configuration with per-key provenance.
struct LoadedConfig {
    Scenario scenario;
    SimConfig sim;  // scenario duplicated inside for convenience
    std::vector<double> sweep_rates;
    std::vector<ScenarioSpec> sweep_scenarios;
    std::vector<LadderRung> ladder;
    int wsa_sweep_points = 99;
    std::vector<std::array<std::string, 3>> provenance;  // key, value, source

    void note(const std::string& key, const std::string& value, const std::string& src) {
        provenance.push_back({key, value, src});
    }
};

namespace detail {
inline std::string rel_to(const std::string& cfg_path, const std::string& ref) {
    namespace fs = std::filesystem;
    fs::path p(ref);
    if (p.is_absolute()) return ref;
    return (fs::path(cfg_path).parent_path() / p).lexically_normal().string();
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& t : out) {
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.front()))) t.erase(t.begin());
        while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}
}  // namespace detail

inline ScenarioSpec parse_scenario_spec(const std::string& token) {
    const auto colon = token.find(':');
    ScenarioSpec spec;
    spec.label = token;
    const std::string proto = colon == std::string::npos ? token : token.substr(0, colon);
    if (proto == "sg") {
        spec.variant = ProtocolVariant::ServerGarbler;
        spec.lphe = false;
        spec.wsa = WsaMode::EvenSplit;
    } else if (proto == "cg_opt") {
        spec.variant = ProtocolVariant::ClientGarbler;
        spec.lphe = true;
        spec.wsa = WsaMode::Optimized;
    } else if (proto == "cg") {
        spec.variant = ProtocolVariant::ClientGarbler;
        spec.lphe = false;
        spec.wsa = WsaMode::EvenSplit;
    } else {
        throw std::runtime_error("scenario '" + token + "': protocol must be sg|cg|cg_opt");
    }
    if (colon != std::string::npos) {
        TextKv tmp = TextKv::parse("x = " + token.substr(colon + 1));
        spec.client_storage_bytes = tmp.get_number("x");
        if (spec.client_storage_bytes <= 0)
            throw std::runtime_error("scenario '" + token + "': storage must be > 0");
    }
    return spec;
}

/// Loads and schema-checks a .cfg file. Every default application is recorded
/// in the provenance list for `--explain`. Unknown keys are rejected.
inline LoadedConfig load_config(const std::string& path) {
    TextKv kv = TextKv::parse_file(path);
    LoadedConfig lc;
    auto src_of = [&](const std::string& key) {
        std::ostringstream os;
        os << path << ":" << kv.line_of(key);
        return os.str();
    };
    auto note_str = [&](const std::string& key, const std::string& v, bool from_file) {
        lc.note(key, v, from_file ? src_of(key) : "default");
    };

    // network is the one mandatory key
    const std::string net_path = detail::rel_to(path, kv.get_string("network"));
    lc.scenario.network = load_network(net_path);
    note_str("network", net_path, true);
    const ValidationReport vr = validate_network(lc.scenario.network);
    if (!vr.ok())
        throw std::runtime_error(net_path + ": invalid network profile: " + vr.violations.front());

    const bool has_constants = kv.has("constants");
    const std::string cost_path =
        has_constants ? detail::rel_to(path, kv.get_string("constants")) : "";
    if (has_constants) {
        lc.scenario.constants = load_constants(cost_path);
        note_str("constants", cost_path, true);
    } else {
        throw std::runtime_error(path + ": missing required key 'constants'");
    }

    for (const auto& [key, member, role] :
         {std::tuple<const char*, DeviceProfile*, Party>{"client_device", &lc.scenario.client,
                                                         Party::Client},
          {"server_device", &lc.scenario.server, Party::Server}}) {
        if (!kv.has(key)) throw std::runtime_error(path + ": missing required key '" +
                                                   std::string(key) + "'");
        const std::string p = detail::rel_to(path, kv.get_string(key));
        *member = load_device(p);
        if (member->role != role)
            throw std::runtime_error(p + ": expected role " +
                                     std::string(role == Party::Client ? "client" : "server"));
        note_str(key, p, true);
    }

    LinkProfile& link = lc.scenario.link;
    link.total_bandwidth_bps = kv.get_number_or("link.total_bandwidth_bps", 1e9);
    note_str("link.total_bandwidth_bps", std::to_string(link.total_bandwidth_bps),
             kv.has("link.total_bandwidth_bps"));
    link.upload_fraction = kv.get_number_or("link.upload_fraction", 0.5);
    if (!(link.upload_fraction > 0.0 && link.upload_fraction < 1.0))
        throw std::runtime_error(path + ": link.upload_fraction: LinkProfile requires "
                                        "0 < upload_fraction < 1");
    note_str("link.upload_fraction", std::to_string(link.upload_fraction),
             kv.has("link.upload_fraction"));
    link.slot_granularity = kv.get_number_or("link.slot_granularity", 0.001);
    if (!(link.slot_granularity > 0.0 && link.slot_granularity <= 0.5))
        throw std::runtime_error(path + ": link.slot_granularity must lie in (0, 0.5]");
    note_str("link.slot_granularity", std::to_string(link.slot_granularity),
             kv.has("link.slot_granularity"));
    link.per_message_overhead_s = kv.get_number_or("link.per_message_overhead_s", 0.0);
    if (link.per_message_overhead_s < 0.0)
        throw std::runtime_error(path + ": link.per_message_overhead_s must be >= 0");
    note_str("link.per_message_overhead_s", std::to_string(link.per_message_overhead_s),
             kv.has("link.per_message_overhead_s"));

    ProtocolConfig& proto = lc.scenario.protocol;
    const std::string variant = kv.get_string_or("protocol", "server_garbler");
    if (variant == "server_garbler" || variant == "sg")
        proto.variant = ProtocolVariant::ServerGarbler;
    else if (variant == "client_garbler" || variant == "cg")
        proto.variant = ProtocolVariant::ClientGarbler;
    else
        throw std::runtime_error(path + ": protocol must be server_garbler|client_garbler");
    note_str("protocol", to_string(proto.variant), kv.has("protocol"));
    proto.lphe_enabled = kv.get_bool_or("lphe", false);
    note_str("lphe", proto.lphe_enabled ? "on" : "off", kv.has("lphe"));

    const std::string wsa = kv.get_string_or("wsa", "even");
    if (wsa == "even") proto.wsa_mode = WsaMode::EvenSplit;
    else if (wsa == "optimized" || wsa == "opt") proto.wsa_mode = WsaMode::Optimized;
    else if (wsa.rfind("fixed:", 0) == 0) {
        proto.wsa_mode = WsaMode::Fixed;
        proto.fixed_upload_fraction = kv.parse_number("wsa", wsa.substr(6));
        if (!(proto.fixed_upload_fraction > 0.0 && proto.fixed_upload_fraction < 1.0))
            throw std::runtime_error(path + ": wsa fixed fraction must lie in (0,1)");
    } else {
        throw std::runtime_error(path + ": wsa must be even|fixed:<f>|opt");
    }
    note_str("wsa", wsa, kv.has("wsa"));

    SimConfig& sim = lc.sim;
    sim.arrival_rate_per_s = kv.get_number_or("sim.arrival_rate_per_s", 0.0);
    if (sim.arrival_rate_per_s < 0.0)
        throw std::runtime_error(path + ": sim.arrival_rate_per_s must be >= 0");
    sim.horizon_s = kv.get_number_or("sim.horizon_s", 86400.0);
    if (sim.horizon_s <= 0.0)
        throw std::runtime_error(path + ": sim.horizon_s must be > 0");
    sim.seed = static_cast<std::uint64_t>(kv.get_number_or("sim.seed", 1));
    sim.runs = static_cast<int>(kv.get_number_or("sim.runs", 50));
    if (sim.runs < 1) throw std::runtime_error(path + ": sim.runs must be >= 1");
    sim.buffer_initially_full = kv.get_bool_or("sim.buffer_initially_full", true);
    sim.pipeline_depth = static_cast<int>(kv.get_number_or("sim.pipeline_depth", 1));
    if (sim.pipeline_depth < 1)
        throw std::runtime_error(path + ": sim.pipeline_depth must be >= 1");
    const std::string cont = kv.get_string_or("sim.contention", "online_priority");
    if (cont == "online_priority") sim.contention = ContentionPolicy::OnlinePriority;
    else if (cont == "exclusive") sim.contention = ContentionPolicy::Exclusive;
    else throw std::runtime_error(path + ": sim.contention must be online_priority|exclusive");
    note_str("sim.arrival_rate_per_s", std::to_string(sim.arrival_rate_per_s),
             kv.has("sim.arrival_rate_per_s"));
    note_str("sim.horizon_s", std::to_string(sim.horizon_s), kv.has("sim.horizon_s"));
    note_str("sim.seed", std::to_string(sim.seed), kv.has("sim.seed"));
    note_str("sim.runs", std::to_string(sim.runs), kv.has("sim.runs"));
    note_str("sim.buffer_initially_full", sim.buffer_initially_full ? "true" : "false",
             kv.has("sim.buffer_initially_full"));
    note_str("sim.pipeline_depth", std::to_string(sim.pipeline_depth),
             kv.has("sim.pipeline_depth"));
    note_str("sim.contention", cont, kv.has("sim.contention"));

    if (kv.has("sweep.rates_per_s")) {
        for (const auto& tok : detail::split_list(kv.get_string("sweep.rates_per_s")))
            lc.sweep_rates.push_back(kv.parse_number("sweep.rates_per_s", tok));
        note_str("sweep.rates_per_s", std::to_string(lc.sweep_rates.size()) + " rates", true);
    }
    if (kv.has("sweep.scenarios")) {
        for (const auto& tok : detail::split_list(kv.get_string("sweep.scenarios")))
            lc.sweep_scenarios.push_back(parse_scenario_spec(tok));
        note_str("sweep.scenarios", std::to_string(lc.sweep_scenarios.size()) + " scenarios",
                 true);
    }
    if (kv.has("whatif.ladder")) {
        for (const auto& tok : detail::split_list(kv.get_string("whatif.ladder"))) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error(path + ": whatif.ladder entries are kind:factor");
            const std::string kind = tok.substr(0, colon);
            const double factor = kv.parse_number("whatif.ladder", tok.substr(colon + 1));
            if (factor < 1.0)
                throw std::runtime_error(path + ": whatif factors must be >= 1");
            LadderRung rung;
            rung.label = tok;
            if (kind == "gc") rung.delta.gc_speedup = factor;
            else if (kind == "he") rung.delta.he_speedup = factor;
            else if (kind == "bw") rung.delta.bandwidth_multiplier = factor;
            else if (kind == "relu") rung.delta.relu_reduction = factor;
            else throw std::runtime_error(path + ": whatif kind must be gc|he|bw|relu");
            lc.ladder.push_back(rung);
        }
        note_str("whatif.ladder", std::to_string(lc.ladder.size()) + " rungs", true);
    }
    lc.wsa_sweep_points = static_cast<int>(kv.get_number_or("wsa_sweep.points", 99));
    if (lc.wsa_sweep_points < 1)
        throw std::runtime_error(path + ": wsa_sweep.points must be >= 1");
    note_str("wsa_sweep.points", std::to_string(lc.wsa_sweep_points),
             kv.has("wsa_sweep.points"));

    kv.reject_unconsumed();
    lc.sim.scenario = lc.scenario;
    return lc;
}

}  // namespace pisim
