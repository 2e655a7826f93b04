// pisim: experiment runner for the hybrid private-inference cost model.
// Subcommands: costs, wsa, whatif, simulate, sweep. Each writes a
// human-readable table to stdout and one machine-readable record file per
// analysis into --out.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "pisim/data.hpp"
#include "pisim/records.hpp"
#include "pisim/scenario.hpp"
#include "pisim/sim.hpp"
#include "pisim/wsa.hpp"

namespace {

using namespace pisim;

std::string now_iso8601() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    bool explain = false;
    // overrides
    std::string protocol;
    std::string lphe;
    std::string wsa;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int runs = 0;
    std::string rates;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "experiment config file")->required();
    cmd->add_option("--out", o.out_dir, "output directory for record files");
    cmd->add_flag("--explain", o.explain, "print resolved configuration with provenance");
    cmd->add_option("--protocol", o.protocol, "override protocol: sg|cg");
    cmd->add_option("--lphe", o.lphe, "override layer-parallel HE: on|off");
    cmd->add_option("--wsa", o.wsa, "override slot allocation: even|fixed:<f>|opt");
    cmd->add_option("--seed", o.seed, "override simulation seed")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--runs", o.runs, "override replication count");
    cmd->add_option("--rates", o.rates, "override sweep rates (comma list, a/b allowed)");
}

LoadedConfig load_with_overrides(const CommonOpts& o) {
    LoadedConfig lc = load_config(o.config_path);
    if (!o.protocol.empty()) {
        if (o.protocol == "sg") lc.scenario.protocol.variant = ProtocolVariant::ServerGarbler;
        else if (o.protocol == "cg") lc.scenario.protocol.variant = ProtocolVariant::ClientGarbler;
        else throw std::runtime_error("--protocol must be sg|cg");
        lc.note("protocol", o.protocol, "flag");
    }
    if (!o.lphe.empty()) {
        if (o.lphe == "on") lc.scenario.protocol.lphe_enabled = true;
        else if (o.lphe == "off") lc.scenario.protocol.lphe_enabled = false;
        else throw std::runtime_error("--lphe must be on|off");
        lc.note("lphe", o.lphe, "flag");
    }
    if (!o.wsa.empty()) {
        if (o.wsa == "even") lc.scenario.protocol.wsa_mode = WsaMode::EvenSplit;
        else if (o.wsa == "opt") lc.scenario.protocol.wsa_mode = WsaMode::Optimized;
        else if (o.wsa.rfind("fixed:", 0) == 0) {
            lc.scenario.protocol.wsa_mode = WsaMode::Fixed;
            lc.scenario.protocol.fixed_upload_fraction = std::stod(o.wsa.substr(6));
            if (!(lc.scenario.protocol.fixed_upload_fraction > 0 &&
                  lc.scenario.protocol.fixed_upload_fraction < 1))
                throw std::runtime_error("--wsa fixed fraction must lie in (0,1)");
        } else {
            throw std::runtime_error("--wsa must be even|fixed:<f>|opt");
        }
        lc.note("wsa", o.wsa, "flag");
    }
    if (o.seed_set) {
        lc.sim.seed = o.seed;
        lc.note("sim.seed", std::to_string(o.seed), "flag");
    }
    if (o.runs > 0) {
        lc.sim.runs = o.runs;
        lc.note("sim.runs", std::to_string(o.runs), "flag");
    }
    if (!o.rates.empty()) {
        lc.sweep_rates.clear();
        TextKv tmp = TextKv::parse("");
        for (const auto& tok : pisim::detail::split_list(o.rates))
            lc.sweep_rates.push_back(tmp.parse_number("--rates", tok));
        lc.note("sweep.rates_per_s", std::to_string(lc.sweep_rates.size()) + " rates", "flag");
    }
    lc.sim.scenario = lc.scenario;
    if (o.explain) {
        std::printf("resolved configuration (%s):\n", o.config_path.c_str());
        for (const auto& [k, v, src] : lc.provenance)
            std::printf("  %-28s = %-32s [%s]\n", k.c_str(), v.c_str(), src.c_str());
    }
    return lc;
}

std::string out_path(const CommonOpts& o, const std::string& file) {
    std::filesystem::create_directories(o.out_dir);
    return (std::filesystem::path(o.out_dir) / file).string();
}

void emit(const RecordTable& t, const CommonOpts& o, const std::string& file) {
    const std::string p = out_path(o, file);
    write_records(t, p, now_iso8601());
    std::printf("wrote %s (%zu rows)\n", p.c_str(), t.rows.size());
}

// ---------------------------------------------------------------- costs ----

int cmd_costs(const CommonOpts& o) {
    LoadedConfig lc = load_with_overrides(o);
    const PhaseCosts pc = phase_costs(lc.scenario);

    std::printf("%-8s %10s %10s %8s %10s %10s\n", "phase", "gc_s", "he_s", "ss_s",
                "comms_s", "total_s");
    for (Phase ph : {Phase::Offline, Phase::Online}) {
        std::printf("%-8s %10.3f %10.3f %8.3f %10.3f %10.3f\n", to_string(ph), pc.gc_s(ph),
                    pc.he_s(ph), pc.ss_s(ph), pc.comm.phase_total(ph), pc.phase_total(ph));
    }
    std::printf("%-8s %10.3f %10.3f %8.3f %10.3f %10.3f\n", "total",
                pc.gc_s(Phase::Offline) + pc.gc_s(Phase::Online),
                pc.he_s(Phase::Offline) + pc.he_s(Phase::Online),
                pc.ss_s(Phase::Offline) + pc.ss_s(Phase::Online), pc.comm.total_s(),
                pc.total_s());
    std::printf("storage: client %.3f GB, server %.3f GB (upload fraction %.3f)\n",
                pc.storage.client_bytes / 1e9, pc.storage.server_bytes / 1e9,
                pc.upload_fraction_used);

    RecordTable t;
    t.name = "costs";
    t.columns = {"record", "phase", "item", "seconds", "bytes"};
    for (Phase ph : {Phase::Offline, Phase::Online}) {
        for (Party p : {Party::Client, Party::Server}) {
            const PrimitiveSeconds& ps = pc.compute.at(ph, p);
            for (Primitive prim :
                 {Primitive::HE, Primitive::GCGarble, Primitive::GCEval, Primitive::SS}) {
                const double s = const_cast<PrimitiveSeconds&>(ps).of(prim);
                if (s == 0.0) continue;
                t.add_row({"compute", to_string(ph),
                           std::string(to_string(prim)) + "." + to_string(p), fmt_double(s),
                           "0"});
            }
        }
        const DirectionalComm& d = pc.comm.at(ph);
        t.add_row({"comm", to_string(ph), "upload", fmt_double(d.up_s), fmt_double(d.up_bytes)});
        t.add_row({"comm", to_string(ph), "download", fmt_double(d.down_s),
                   fmt_double(d.down_bytes)});
    }
    t.add_row({"storage", "total", "client", "0", fmt_double(pc.storage.client_bytes)});
    t.add_row({"storage", "total", "server", "0", fmt_double(pc.storage.server_bytes)});
    t.add_row({"link", "total", "upload_fraction", fmt_double(pc.upload_fraction_used), "0"});
    emit(t, o, "costs.csv");
    return 0;
}

// ------------------------------------------------------------------ wsa ----

int cmd_wsa(const CommonOpts& o) {
    LoadedConfig lc = load_with_overrides(o);
    const Scenario& sc = lc.scenario;
    const ProtocolTrace tr = build_trace(sc.network, sc.constants, sc.protocol.variant);

    const auto points = sweep_splits(tr, sc.link.total_bandwidth_bps, lc.wsa_sweep_points,
                                     sc.link.per_message_overhead_s);
    const SplitResult best = optimize_split(tr, sc.link.total_bandwidth_bps,
                                            sc.link.slot_granularity,
                                            sc.link.per_message_overhead_s);
    const double even = evaluate_split(tr, sc.link.total_bandwidth_bps, 0.5,
                                       sc.link.per_message_overhead_s);
    const double up_bytes = trace_bytes(tr, {}, Direction::Upload);
    const double down_bytes = trace_bytes(tr, {}, Direction::Download);
    const SplitResult bound =
        closed_form_bound(up_bytes, down_bytes, sc.link.total_bandwidth_bps);

    std::printf("%s comm: even split %.2f s; optimum %.2f s at upload fraction %.3f "
                "(upload %.0f Mbps, download %.0f Mbps)\n",
                to_string(sc.protocol.variant), even, best.seconds, best.upload_fraction,
                best.upload_fraction * sc.link.total_bandwidth_bps / 1e6,
                (1 - best.upload_fraction) * sc.link.total_bandwidth_bps / 1e6);
    std::printf("reduction vs even split: %.1f%%; analytic bound %.2f s at %.4f\n",
                100.0 * (1.0 - best.seconds / even), bound.seconds, bound.upload_fraction);

    RecordTable t;
    t.name = "wsa_sweep";
    t.columns = {"upload_fraction", "comm_total_s", "comm_offline_s", "comm_online_s"};
    for (const auto& p : points)
        t.add_row({fmt_double(p.upload_fraction), fmt_double(p.total_s),
                   fmt_double(p.offline_s), fmt_double(p.online_s)});
    emit(t, o, "wsa.csv");
    return 0;
}

// --------------------------------------------------------------- whatif ----

int cmd_whatif(const CommonOpts& o) {
    LoadedConfig lc = load_with_overrides(o);
    if (lc.ladder.empty())
        throw std::runtime_error("config has no whatif.ladder entries");

    RecordTable t;
    t.name = "whatif_ladder";
    t.columns = {"step", "label", "gc_speedup", "he_speedup", "bandwidth_multiplier",
                 "relu_reduction", "total_s", "offline_s", "online_s", "offline_fraction",
                 "gc_s", "he_s", "ss_s", "comm_s"};
    std::printf("%-12s %10s %10s %10s %8s\n", "step", "total_s", "offline_s", "online_s",
                "off%");

    WhatIfFactors acc;
    int step = 0;
    auto row = [&](const std::string& label) {
        const PhaseCosts pc = apply_whatif(lc.scenario, acc);
        const double off = pc.offline_s(), on = pc.online_s(), tot = pc.total_s();
        std::printf("%-12s %10.3f %10.3f %10.3f %7.1f%%\n", label.c_str(), tot, off, on,
                    100.0 * off / tot);
        t.add_row({std::to_string(step), label, fmt_double(acc.gc_speedup),
                   fmt_double(acc.he_speedup), fmt_double(acc.bandwidth_multiplier),
                   fmt_double(acc.relu_reduction), fmt_double(tot), fmt_double(off),
                   fmt_double(on), fmt_double(off / tot),
                   fmt_double(pc.gc_s(Phase::Offline) + pc.gc_s(Phase::Online)),
                   fmt_double(pc.he_s(Phase::Offline) + pc.he_s(Phase::Online)),
                   fmt_double(pc.ss_s(Phase::Offline) + pc.ss_s(Phase::Online)),
                   fmt_double(pc.comm.total_s())});
        ++step;
    };
    row("base");
    for (const auto& rung : lc.ladder) {
        acc = acc.compose(rung.delta);
        row(rung.label);
    }
    emit(t, o, "whatif.csv");
    return 0;
}

// ------------------------------------------------------------- simulate ----

int cmd_simulate(const CommonOpts& o) {
    LoadedConfig lc = load_with_overrides(o);
    if (lc.sim.arrival_rate_per_s <= 0.0)
        throw std::runtime_error("sim.arrival_rate_per_s must be > 0 for simulate");

    RecordTable t;
    t.name = "simulate";
    t.columns = {"run_index", "completed", "mean_latency_s", "queue_wait_mean_s",
                 "offline_inline_mean_s", "online_mean_s", "unserved", "saturated"};
    std::vector<RunMetrics> per_run;
    for (int i = 0; i < lc.sim.runs; ++i) {
        SimConfig c = lc.sim;
        c.seed = derive_seed(lc.sim.seed, static_cast<std::uint64_t>(i));
        const RunMetrics m = run(c);
        per_run.push_back(m);
        t.add_row({std::to_string(i), std::to_string(m.completed),
                   fmt_double(m.mean_latency_s), fmt_double(m.queue_wait_mean_s),
                   fmt_double(m.offline_inline_mean_s), fmt_double(m.online_mean_s),
                   std::to_string(m.unserved_at_horizon), m.saturated ? "1" : "0"});
    }
    const RateMetrics agg = aggregate_runs(lc.sim.arrival_rate_per_s, per_run);
    std::printf("rate %.6g/s over %d runs: mean latency %.2f s (sd %.2f); "
                "queue %.2f + inline-offline %.2f + online %.2f; saturated %d/%d\n",
                agg.rate_per_s, agg.runs, agg.mean_latency_mean_s, agg.mean_latency_sd_s,
                agg.queue_wait_mean_s, agg.offline_inline_mean_s, agg.online_mean_s,
                agg.saturated_count, agg.runs);
    std::printf("buffer slots: %llu\n",
                static_cast<unsigned long long>(buffer_slots(lc.sim)));
    emit(t, o, "simulate.csv");
    return 0;
}

// ---------------------------------------------------------------- sweep ----

int cmd_sweep(const CommonOpts& o) {
    LoadedConfig lc = load_with_overrides(o);
    if (lc.sweep_rates.empty())
        throw std::runtime_error("config has no sweep.rates_per_s");

    std::vector<ScenarioSpec> scenarios = lc.sweep_scenarios;
    if (scenarios.empty()) {
        ScenarioSpec self;
        self.label = "configured";
        self.variant = lc.scenario.protocol.variant;
        self.lphe = lc.scenario.protocol.lphe_enabled;
        self.wsa = lc.scenario.protocol.wsa_mode;
        scenarios.push_back(self);
    }

    RecordTable t;
    t.name = "sweep";
    t.columns = {"scenario", "rate_per_s", "runs", "mean_latency_s_mean", "mean_latency_s_sd",
                 "queue_wait_mean_s", "offline_inline_mean_s", "online_mean_s",
                 "completed_mean", "saturated_count"};
    RecordTable ts;
    ts.name = "sweep_summary";
    ts.columns = {"scenario", "max_sustainable_rate_per_s", "buffer_slots"};

    for (const auto& spec : scenarios) {
        SimConfig cfg = lc.sim;
        cfg.scenario.protocol.variant = spec.variant;
        cfg.scenario.protocol.lphe_enabled = spec.lphe;
        cfg.scenario.protocol.wsa_mode = spec.wsa;
        if (spec.client_storage_bytes > 0)
            cfg.scenario.client.storage_capacity_bytes = spec.client_storage_bytes;
        const SweepResult res = sweep(cfg, lc.sweep_rates);
        for (const auto& rm : res.rates)
            t.add_row({spec.label, fmt_double(rm.rate_per_s), std::to_string(rm.runs),
                       fmt_double(rm.mean_latency_mean_s), fmt_double(rm.mean_latency_sd_s),
                       fmt_double(rm.queue_wait_mean_s), fmt_double(rm.offline_inline_mean_s),
                       fmt_double(rm.online_mean_s), fmt_double(rm.completed_mean),
                       std::to_string(rm.saturated_count)});
        ts.add_row({spec.label, fmt_double(res.max_sustainable_rate_per_s),
                    std::to_string(static_cast<unsigned long long>(buffer_slots(cfg)))});
        std::printf("%-12s max sustainable rate %.6g/s (1 per %.0f s), slots %llu\n",
                    spec.label.c_str(), res.max_sustainable_rate_per_s,
                    res.max_sustainable_rate_per_s > 0 ? 1.0 / res.max_sustainable_rate_per_s
                                                       : 0.0,
                    static_cast<unsigned long long>(buffer_slots(cfg)));
        for (const auto& rm : res.rates)
            std::printf("  rate 1/%-7.0f mean %10.2f s  (queue %8.2f, inline %8.2f, "
                        "online %7.2f) sat %d/%d\n",
                        1.0 / rm.rate_per_s, rm.mean_latency_mean_s, rm.queue_wait_mean_s,
                        rm.offline_inline_mean_s, rm.online_mean_s, rm.saturated_count,
                        rm.runs);
    }
    emit(t, o, "sweep.csv");
    emit(ts, o, "sweep_summary.csv");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid private-inference system cost model and simulator"};
    app.require_subcommand(1);
    CommonOpts opts;
    auto* c_costs = app.add_subcommand("costs", "single-inference phase cost report");
    auto* c_wsa = app.add_subcommand("wsa", "bandwidth split sweep and optimum");
    auto* c_whatif = app.add_subcommand("whatif", "accumulating acceleration ladder");
    auto* c_sim = app.add_subcommand("simulate", "replicated arrival simulation at one rate");
    auto* c_sweep = app.add_subcommand("sweep", "arrival-rate sweep across scenarios");
    for (auto* c : {c_costs, c_wsa, c_whatif, c_sim, c_sweep}) add_common(c, opts);

    CLI11_PARSE(app, argc, argv);
    try {
        if (c_costs->parsed()) return cmd_costs(opts);
        if (c_wsa->parsed()) return cmd_wsa(opts);
        if (c_whatif->parsed()) return cmd_whatif(opts);
        if (c_sim->parsed()) return cmd_simulate(opts);
        if (c_sweep->parsed()) return cmd_sweep(opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pisim: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
