#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pisim/cost.hpp"

namespace pisim {

/// Total communication seconds of the trace with `upload_fraction` of the
/// duplex bandwidth assigned to upload.
inline double evaluate_split(const ProtocolTrace& tr, double total_bandwidth_bps,
                             double upload_fraction,
                             double per_message_overhead_s = 0.0) {
    if (!(upload_fraction > 0.0 && upload_fraction < 1.0))
        throw std::invalid_argument("upload_fraction must lie in (0,1)");
    LinkProfile link;
    link.total_bandwidth_bps = total_bandwidth_bps;
    link.upload_fraction = upload_fraction;
    link.per_message_overhead_s = per_message_overhead_s;
    return comm_latency(tr, link).total_s();
}

struct SplitResult {
    double upload_fraction = 0.5;
    double seconds = 0.0;
};

/// Grid search over fractions {g, 2g, ...}; deterministic lowest-fraction
/// tie-break, independent of evaluation order.
inline SplitResult optimize_split(const ProtocolTrace& tr, double total_bandwidth_bps,
                                  double granularity = 0.001,
                                  double per_message_overhead_s = 0.0) {
    const int cells = static_cast<int>(std::round(1.0 / granularity));
    if (cells < 2) throw std::invalid_argument("granularity must divide (0,1) into >= 2 cells");
    SplitResult best;
    bool have = false;
    for (int k = 1; k < cells; ++k) {
        const double f = k * granularity;
        if (f >= 1.0) break;
        const double t =
            evaluate_split(tr, total_bandwidth_bps, f, per_message_overhead_s);
        if (!have || t < best.seconds) {
            best = {f, t};
            have = true;
        }
    }
    return best;
}

/// Analytic optimum of the two-aggregate relaxation U/u + D/(B-u):
/// u* = B*sqrt(U)/(sqrt(U)+sqrt(D)). Lower bound for the grid optimizer.
inline SplitResult closed_form_bound(double upload_bytes, double download_bytes,
                                     double total_bandwidth_bps) {
    if (upload_bytes < 0 || download_bytes < 0 ||
        (upload_bytes == 0 && download_bytes == 0))
        throw std::invalid_argument("need at least one nonzero aggregate");
    const double su = std::sqrt(upload_bytes);
    const double sd = std::sqrt(download_bytes);
    SplitResult r;
    r.upload_fraction = su / (su + sd);
    const double B = total_bandwidth_bps;
    // degenerate single-direction aggregates collapse to the full pipe
    double t = 0.0;
    if (upload_bytes > 0) t += upload_bytes * 8.0 / (B * r.upload_fraction);
    if (download_bytes > 0) t += download_bytes * 8.0 / (B * (1.0 - r.upload_fraction));
    r.seconds = t;
    return r;
}

struct SweepPoint {
    double upload_fraction;
    double total_s;
    double offline_s;
    double online_s;
};

/// Fraction sweep, one record per grid point (plot-ready).
inline std::vector<SweepPoint> sweep_splits(const ProtocolTrace& tr,
                                            double total_bandwidth_bps, int points,
                                            double per_message_overhead_s = 0.0) {
    std::vector<SweepPoint> out;
    out.reserve(points);
    for (int k = 1; k <= points; ++k) {
        const double f = static_cast<double>(k) / (points + 1);
        LinkProfile link;
        link.total_bandwidth_bps = total_bandwidth_bps;
        link.upload_fraction = f;
        link.per_message_overhead_s = per_message_overhead_s;
        const CommLatency c = comm_latency(tr, link);
        out.push_back({f, c.total_s(), c.phase_total(Phase::Offline),
                       c.phase_total(Phase::Online)});
    }
    return out;
}

}  // namespace pisim
