#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <queue>
#include <vector>

#include "pisim/rng.hpp"
#include "pisim/scenario.hpp"

namespace pisim {

enum class ContentionPolicy { OnlinePriority, Exclusive };

struct SimConfig {
    Scenario scenario;
    double arrival_rate_per_s = 0.0;
    double horizon_s = 86400.0;
    std::uint64_t seed = 1;
    int runs = 50;
    bool buffer_initially_full = true;
    int pipeline_depth = 1;
    ContentionPolicy contention = ContentionPolicy::OnlinePriority;
};

struct RunMetrics {
    std::uint64_t completed = 0;
    double mean_latency_s = 0.0;
    double queue_wait_mean_s = 0.0;
    double offline_inline_mean_s = 0.0;
    double online_mean_s = 0.0;
    std::vector<std::pair<double, int>> occupancy_samples;  // (time, buffered)
    std::uint64_t unserved_at_horizon = 0;
    bool saturated = false;
};

/// How a served request obtained its pre-compute.
enum class ServiceKind { Buffered, AwaitedPipeline, InlineOffline };

struct RequestRecord {
    double arrival = 0.0;
    double service_start = 0.0;
    double online_start = 0.0;
    double completion = 0.0;
    ServiceKind kind = ServiceKind::Buffered;
};

/// Pre-computes that fit in both parties' storage at once. Zero means no
/// offline phase is possible and every request runs its pre-compute inline.
inline std::uint64_t buffer_slots(const SimConfig& cfg) {
    const StorageCosts per = storage_per_inference(
        cfg.scenario.network, cfg.scenario.constants, cfg.scenario.protocol.variant);
    const auto fit = [](double cap, double need) -> std::uint64_t {
        if (need <= 0.0) return UINT64_MAX;
        return static_cast<std::uint64_t>(std::floor(cap / need));
    };
    return std::min(fit(cfg.scenario.client.storage_capacity_bytes, per.client_bytes),
                    fit(cfg.scenario.server.storage_capacity_bytes, per.server_bytes));
}

namespace detail {

enum Resource { kLink = 0, kClientCpu = 1, kServerCpu = 2, kResourceCount = 3 };

struct Segment {
    Resource res;
    double seconds;
};

/// Per-resource segment schedule for one phase of the trace, at the resolved
/// link split and device scales (LPHE already collapsed to the max layer).
inline std::vector<Segment> phase_segments(const ProtocolTrace& tr, Phase phase,
                                           const Scenario& sc, const LinkProfile& link) {
    std::vector<Segment> out;
    for (const auto& s : tr.steps) {
        if (s.phase != phase) continue;
        if (s.is_transfer()) {
            const double secs = transfer_seconds(s.transfer(), link);
            if (secs > 0.0) out.push_back({kLink, secs});
        } else {
            const auto& c = s.compute();
            const ComputeScales& scales = c.party == Party::Client
                                              ? sc.client.compute_scale
                                              : sc.server.compute_scale;
            double ref = c.seconds_ref;
            double scale = 1.0;
            switch (c.primitive) {
                case Primitive::HE:
                    if (sc.protocol.lphe_enabled) {
                        if (c.per_layer_s.empty() && c.seconds_ref > 0.0)
                            throw std::runtime_error("LPHE requires per-layer HE costs");
                        ref = 0.0;
                        for (double v : c.per_layer_s) ref = std::max(ref, v);
                    }
                    scale = scales.he;
                    break;
                case Primitive::GCGarble: scale = scales.gc_garble; break;
                case Primitive::GCEval: scale = scales.gc_eval; break;
                case Primitive::SS: scale = scales.ss; break;
            }
            const double secs = ref * scale;
            if (secs > 0.0)
                out.push_back({c.party == Party::Client ? kClientCpu : kServerCpu, secs});
        }
    }
    return out;
}

struct Exec {
    const std::vector<Segment>* segs = nullptr;
    std::size_t idx = 0;
    double remaining = 0.0;
    bool running = false;
    double seg_start = 0.0;
    std::uint64_t version = 0;
    bool service = false;  // request-serving chain (top priority class)
    bool alive = false;

    bool finished() const { return idx >= segs->size(); }
    Resource wanted() const { return (*segs)[idx].res; }
};

}  // namespace detail

/// One replication. Event-loop semantics:
///  - Poisson arrivals, FIFO service, one request in service at a time.
///  - A served request consumes a buffered pre-compute when one exists and
///    then runs only its online steps. With zero slots it runs the offline
///    steps inline. Otherwise it waits for the background pipeline's next
///    pre-compute; that wait is accounted as inline offline time.
///  - Background refill keeps up to pipeline_depth pre-computes in flight
///    while free slots remain; progress is preempted, never lost.
///  - OnlinePriority lets serving work displace background work per resource;
///    Exclusive halts all background work while a request executes.
/// Identical config and seed give identical metrics.
inline RunMetrics run(const SimConfig& cfg, std::vector<RequestRecord>* details = nullptr) {
    using namespace detail;
    const Scenario& sc = cfg.scenario;
    const ProtocolTrace tr = build_trace(sc.network, sc.constants, sc.protocol.variant);
    const LinkProfile link = resolved_link(sc, tr);

    const std::vector<Segment> offline_segs = phase_segments(tr, Phase::Offline, sc, link);
    const std::vector<Segment> online_segs = phase_segments(tr, Phase::Online, sc, link);
    std::vector<Segment> inline_segs = offline_segs;
    inline_segs.insert(inline_segs.end(), online_segs.begin(), online_segs.end());

    const std::uint64_t slots = buffer_slots(cfg);
    const double T = cfg.horizon_s;

    // arrivals
    std::vector<double> arrivals;
    if (cfg.arrival_rate_per_s > 0.0) {
        Xoshiro256pp rng(cfg.seed);
        double t = 0.0;
        while (true) {
            t += rng.exponential(cfg.arrival_rate_per_s);
            if (t > T) break;
            arrivals.push_back(t);
        }
    }

    struct Request {
        double arrival = 0.0;
        double service_start = 0.0;
        double online_start = 0.0;
        ServiceKind kind = ServiceKind::Buffered;
    };

    // event queue: completions sort before arrivals at equal timestamps,
    // then insertion order
    struct Ev {
        double time;
        int cls;  // 0 completion, 1 arrival
        std::uint64_t seq;
        int exec_id;           // completions
        std::uint64_t version;
        std::size_t arrival_idx;  // arrivals
        bool operator>(const Ev& o) const {
            if (time != o.time) return time > o.time;
            if (cls != o.cls) return cls > o.cls;
            return seq > o.seq;
        }
    };
    std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> evq;
    std::uint64_t seq = 0;
    for (std::size_t i = 0; i < arrivals.size(); ++i)
        evq.push({arrivals[i], 1, seq++, -1, 0, i});

    std::vector<Exec> execs;
    std::deque<std::size_t> waiting;        // request indices, FIFO
    std::vector<Request> reqs(arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) reqs[i].arrival = arrivals[i];

    std::uint64_t buffered = cfg.buffer_initially_full ? slots : 0;
    if (slots != UINT64_MAX && buffered > slots) buffered = slots;
    std::optional<std::size_t> in_service;       // request index
    int service_exec = -1;
    bool awaiting_precompute = false;
    std::size_t online_boundary = 0;             // segment index where online starts
    bool online_started = false;

    RunMetrics m;
    std::vector<double> lat, qwait, inl, onl;
    std::vector<std::pair<double, std::uint64_t>> queue_samples;
    auto sample_queue = [&](double t) {
        queue_samples.emplace_back(t, waiting.size());
    };
    auto sample_occ = [&](double t) {
        if (slots != UINT64_MAX)
            m.occupancy_samples.emplace_back(t, static_cast<int>(buffered));
    };
    sample_occ(0.0);
    sample_queue(0.0);

    std::vector<int> bg_order;  // spawn order of live background execs

    auto spawn = [&](const std::vector<Segment>* segs, bool service) -> int {
        Exec e;
        e.segs = segs;
        e.idx = 0;
        e.remaining = segs->empty() ? 0.0 : (*segs)[0].seconds;
        e.service = service;
        e.alive = true;
        execs.push_back(e);
        const int id = static_cast<int>(execs.size()) - 1;
        if (!service) bg_order.push_back(id);
        return id;
    };

    auto refill = [&](double) {
        if (slots == 0 || slots == UINT64_MAX) {
            if (slots == 0) return;
        }
        while (static_cast<int>(bg_order.size()) < cfg.pipeline_depth &&
               buffered + bg_order.size() < slots)
            spawn(&offline_segs, false);
    };

    bool service_executing = false;  // service exec currently has segments to run

    auto reschedule = [&](double now) {
        service_executing = service_exec >= 0 && execs[service_exec].alive &&
                            !execs[service_exec].finished();
        // stop background execs that lost their resource or the policy gate
        for (int id : bg_order) {
            Exec& e = execs[id];
            if (!e.alive || e.finished() || !e.running) continue;
            bool blocked = false;
            if (cfg.contention == ContentionPolicy::Exclusive) {
                blocked = service_executing;
            } else if (service_executing) {
                blocked = execs[service_exec].wanted() == e.wanted();
            }
            // a bg exec spawned earlier keeps the resource against later ones;
            // enforced below by start order
            if (blocked) {
                e.remaining -= now - e.seg_start;
                if (e.remaining < 0.0) e.remaining = 0.0;
                e.running = false;
                ++e.version;
            }
        }
        bool res_busy[kResourceCount] = {false, false, false};
        auto try_start = [&](int id) {
            Exec& e = execs[id];
            if (!e.alive || e.finished()) return;
            const Resource r = e.wanted();
            if (res_busy[r]) {
                if (e.running) {  // displaced by a higher-priority exec
                    e.remaining -= now - e.seg_start;
                    if (e.remaining < 0.0) e.remaining = 0.0;
                    e.running = false;
                    ++e.version;
                }
                return;
            }
            if (!e.service) {
                if (cfg.contention == ContentionPolicy::Exclusive && service_executing)
                    return;
            }
            res_busy[r] = true;
            if (!e.running) {
                e.running = true;
                e.seg_start = now;
                ++e.version;
                evq.push({now + e.remaining, 0, seq++, id, e.version, 0});
            }
        };
        if (service_executing) try_start(service_exec);
        for (int id : bg_order) try_start(id);
    };

    auto begin_online = [&](double now) {
        if (!online_started && in_service) {
            reqs[*in_service].online_start = now;
            online_started = true;
        }
    };

    auto start_service = [&](double now) {
        if (in_service || waiting.empty()) return;
        const std::size_t r = waiting.front();
        waiting.pop_front();
        sample_queue(now);
        in_service = r;
        reqs[r].service_start = now;
        online_started = false;
        awaiting_precompute = false;
        if (slots != 0 && buffered > 0) {
            --buffered;
            sample_occ(now);
            reqs[r].kind = ServiceKind::Buffered;
            service_exec = spawn(&online_segs, true);
            online_boundary = 0;
            begin_online(now);
        } else if (slots == 0) {
            reqs[r].kind = ServiceKind::InlineOffline;
            service_exec = spawn(&inline_segs, true);
            online_boundary = offline_segs.size();
            if (online_boundary == 0) begin_online(now);
        } else {
            reqs[r].kind = ServiceKind::AwaitedPipeline;
            service_exec = -1;
            awaiting_precompute = true;  // consume the pipeline's next pre-compute
        }
        refill(now);
    };

    auto finish_service = [&](double now) {
        const Request& rq = reqs[*in_service];
        lat.push_back(now - rq.arrival);
        qwait.push_back(rq.service_start - rq.arrival);
        inl.push_back(rq.online_start - rq.service_start);
        onl.push_back(now - rq.online_start);
        if (details)
            details->push_back(
                {rq.arrival, rq.service_start, rq.online_start, now, rq.kind});
        in_service.reset();
        service_exec = -1;
        start_service(now);
    };

    refill(0.0);
    start_service(0.0);
    reschedule(0.0);

    double now = 0.0;
    while (!evq.empty()) {
        const Ev ev = evq.top();
        if (ev.time > T) break;
        evq.pop();
        now = ev.time;
        if (ev.cls == 1) {  // arrival
            waiting.push_back(ev.arrival_idx);
            sample_queue(now);
            start_service(now);
            reschedule(now);
            continue;
        }
        Exec& e = execs[ev.exec_id];
        if (!e.alive || !e.running || ev.version != e.version) continue;  // stale
        // segment complete
        e.running = false;
        ++e.version;
        ++e.idx;
        if (!e.finished()) {
            e.remaining = (*e.segs)[e.idx].seconds;
            if (e.service && e.idx == online_boundary) begin_online(now);
        } else {
            e.alive = false;
            if (e.service) {
                finish_service(now);
            } else {
                bg_order.erase(std::find(bg_order.begin(), bg_order.end(), ev.exec_id));
                ++buffered;
                sample_occ(now);
                if (awaiting_precompute && in_service) {
                    --buffered;
                    sample_occ(now);
                    awaiting_precompute = false;
                    service_exec = spawn(&online_segs, true);
                    online_boundary = 0;
                    begin_online(now);
                }
                refill(now);
            }
        }
        reschedule(now);
    }

    m.completed = lat.size();
    auto mean = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    m.mean_latency_s = mean(lat);
    m.queue_wait_mean_s = mean(qwait);
    m.offline_inline_mean_s = mean(inl);
    m.online_mean_s = mean(onl);
    m.unserved_at_horizon = arrivals.size() - m.completed;

    // saturation: queue backlog grew over the final quarter and is material.
    auto q_at = [&](double t) -> std::uint64_t {
        std::uint64_t q = 0;
        for (const auto& [ts, qs] : queue_samples) {
            if (ts > t) break;
            q = qs;
        }
        return q;
    };
    const std::uint64_t q34 = q_at(0.75 * T);
    const std::uint64_t qend = q_at(T);
    m.saturated = qend >= 5 && qend > q34;
    return m;
}

struct RateMetrics {
    double rate_per_s = 0.0;
    int runs = 0;
    double mean_latency_mean_s = 0.0;
    double mean_latency_sd_s = 0.0;
    double queue_wait_mean_s = 0.0;
    double offline_inline_mean_s = 0.0;
    double online_mean_s = 0.0;
    double completed_mean = 0.0;
    int saturated_count = 0;

    bool saturated_any() const { return saturated_count > 0; }
    bool saturated_all() const { return saturated_count == runs; }
};

/// Permutation-invariant aggregation: values are sorted before summation so
/// any replication execution order yields bit-identical aggregates.
inline RateMetrics aggregate_runs(double rate, std::vector<RunMetrics> per_run) {
    RateMetrics rm;
    rm.rate_per_s = rate;
    rm.runs = static_cast<int>(per_run.size());
    auto sorted_mean = [](std::vector<double> v) {
        if (v.empty()) return 0.0;
        std::sort(v.begin(), v.end());
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    std::vector<double> lat, qw, inl, onl, comp;
    for (const auto& r : per_run) {
        lat.push_back(r.mean_latency_s);
        qw.push_back(r.queue_wait_mean_s);
        inl.push_back(r.offline_inline_mean_s);
        onl.push_back(r.online_mean_s);
        comp.push_back(static_cast<double>(r.completed));
        if (r.saturated) ++rm.saturated_count;
    }
    rm.mean_latency_mean_s = sorted_mean(lat);
    std::vector<double> dev;
    dev.reserve(lat.size());
    for (double x : lat) {
        const double d = x - rm.mean_latency_mean_s;
        dev.push_back(d * d);
    }
    const double var = sorted_mean(dev);
    rm.mean_latency_sd_s = std::sqrt(var);
    rm.queue_wait_mean_s = sorted_mean(qw);
    rm.offline_inline_mean_s = sorted_mean(inl);
    rm.online_mean_s = sorted_mean(onl);
    rm.completed_mean = sorted_mean(comp);
    return rm;
}

struct SweepResult {
    std::vector<RateMetrics> rates;
    /// Largest swept rate with saturated == false in every replication;
    /// zero when no swept rate qualifies.
    double max_sustainable_rate_per_s = 0.0;
};

/// Independent replications per rate with seeds derived from (seed, index).
inline SweepResult sweep(const SimConfig& cfg, const std::vector<double>& rates) {
    if (rates.empty()) throw std::invalid_argument("rates must be nonempty");
    SweepResult out;
    for (double rate : rates) {
        std::vector<RunMetrics> per_run;
        per_run.reserve(cfg.runs);
        for (int i = 0; i < cfg.runs; ++i) {
            SimConfig c = cfg;
            c.arrival_rate_per_s = rate;
            c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
            per_run.push_back(run(c));
        }
        out.rates.push_back(aggregate_runs(rate, std::move(per_run)));
    }
    for (const auto& rm : out.rates)
        if (!rm.saturated_any() && rm.rate_per_s > out.max_sustainable_rate_per_s)
            out.max_sustainable_rate_per_s = rm.rate_per_s;
    return out;
}

}  // namespace pisim
