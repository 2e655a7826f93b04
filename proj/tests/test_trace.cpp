#include <gtest/gtest.h>

#include "pisim/data.hpp"
#include "pisim/trace.hpp"

using namespace pisim;

namespace {

NetworkProfile toy_network() {
    NetworkProfile net;
    net.name = "toy";
    net.input_bytes = 80;
    LayerSpec lin;
    lin.index = 0;
    lin.kind = LayerKind::Linear;
    lin.he_latency_ref_s = 2.0;
    lin.share_bytes = 1000;
    lin.out_elements = 10;
    LayerSpec relu;
    relu.index = 1;
    relu.kind = LayerKind::Relu;
    relu.relu_count = 100;
    net.layers = {lin, relu};
    net.total_relus = 100;
    net.n_linear = 1;
    return net;
}

CostConstants toy_constants() {
    CostConstants c;
    c.gc_bytes_per_relu = 18200;
    c.garbler_encoding_bytes_per_relu = 3500;
    c.gc_garble_s_per_relu_ref = 1e-5;
    c.gc_eval_s_per_relu_ref = 2e-5;
    c.ot_offline_bytes_per_relu = 1500;
    c.ot_online_bytes_per_relu = 600;
    c.label_bytes_per_relu = 596;
    c.ss_online_s = 0.1;
    c.randomness_bytes_per_element = 8;
    return c;
}

std::string data_path(const std::string& rel) {
    return std::string(PISIM_DATA_DIR) + "/" + rel;
}

// Hand enumeration of the one-linear-one-relu schedule: per-layer share
// exchange (1000 B each way), 1.82 MB of GC material, a 150 kB offline OT
// split 1:2 receiver:sender, 59.6 kB of labels each way, 80 B input share.
TEST(BuildTrace, ToyServerGarblerMatchesHandEnumeration) {
    const ProtocolTrace tr =
        build_trace(toy_network(), toy_constants(), ProtocolVariant::ServerGarbler);
    ASSERT_EQ(tr.steps.size(), 12u);

    EXPECT_DOUBLE_EQ(trace_bytes(tr), 2091280.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Offline), 1972000.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Online), 119280.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Offline, Direction::Upload), 51000.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Offline, Direction::Download), 1921000.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Online, Direction::Upload), 59680.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Online, Direction::Download), 59600.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, {}, {}, std::string("gc_material")), 1820000.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, {}, {}, std::string("ot_offline")), 150000.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, {}, {}, std::string("ot_online")), 0.0);

    // phase ordering invariant
    bool online_seen = false;
    for (const auto& s : tr.steps) {
        if (s.phase == Phase::Online) online_seen = true;
        if (online_seen) {
            EXPECT_EQ(s.phase, Phase::Online);
        }
    }
    // exactly one HE group carrying the per-layer vector, one garble, one eval
    int he = 0, garble = 0, eval = 0;
    for (const auto& s : tr.steps) {
        if (s.is_transfer()) continue;
        const auto& c = s.compute();
        if (c.primitive == Primitive::HE) {
            ++he;
            EXPECT_EQ(c.per_layer_s.size(), 1u);
            EXPECT_DOUBLE_EQ(c.per_layer_s[0], 2.0);
        }
        if (c.primitive == Primitive::GCGarble) {
            ++garble;
            EXPECT_EQ(c.party, Party::Server);
        }
        if (c.primitive == Primitive::GCEval) {
            ++eval;
            EXPECT_EQ(c.party, Party::Client);
        }
    }
    EXPECT_EQ(he, 1);
    EXPECT_EQ(garble, 1);
    EXPECT_EQ(eval, 1);
}

TEST(BuildTrace, ToyClientGarblerMirrorsWithOnlineOt) {
    const ProtocolTrace tr =
        build_trace(toy_network(), toy_constants(), ProtocolVariant::ClientGarbler);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Offline), 1822000.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Online), 179280.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, {}, {}, std::string("ot_online")), 60000.0);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, {}, {}, std::string("ot_offline")), 0.0);
    // online upload exceeds the server-garbler one: OT response plus own labels
    const ProtocolTrace sg =
        build_trace(toy_network(), toy_constants(), ProtocolVariant::ServerGarbler);
    EXPECT_GT(trace_bytes(tr, Phase::Online, Direction::Upload),
              trace_bytes(sg, Phase::Online, Direction::Upload));
}

TEST(BuildTrace, VariantSwapFlipsExactlyTheGarblingLeg) {
    const NetworkProfile net = toy_network();
    const CostConstants c = toy_constants();
    const ProtocolTrace sg = build_trace(net, c, ProtocolVariant::ServerGarbler);
    const ProtocolTrace cg = build_trace(net, c, ProtocolVariant::ClientGarbler);

    // gc material: identical bytes, flipped direction
    EXPECT_DOUBLE_EQ(trace_bytes(sg, {}, {}, std::string("gc_material")),
                     trace_bytes(cg, {}, {}, std::string("gc_material")));
    EXPECT_DOUBLE_EQ(trace_bytes(sg, {}, Direction::Download, std::string("gc_material")),
                     trace_bytes(cg, {}, Direction::Upload, std::string("gc_material")));
    // OT moves offline -> online
    EXPECT_GT(trace_bytes(sg, Phase::Offline, {}, std::string("ot_offline")), 0.0);
    EXPECT_GT(trace_bytes(cg, Phase::Online, {}, std::string("ot_online")), 0.0);
    EXPECT_DOUBLE_EQ(trace_bytes(sg, Phase::Online, {}, std::string("ot_offline")), 0.0);
    EXPECT_DOUBLE_EQ(trace_bytes(cg, Phase::Offline, {}, std::string("ot_online")), 0.0);
    // every other transfer byte-identical in order
    auto rest = [](const ProtocolTrace& tr) {
        std::vector<std::pair<std::string, double>> v;
        for (const auto& s : tr.steps) {
            if (!s.is_transfer()) continue;
            const auto& t = s.transfer();
            if (t.tag == "gc_material" || t.tag.rfind("ot_", 0) == 0) continue;
            v.emplace_back(t.tag, t.bytes);
        }
        return v;
    };
    EXPECT_EQ(rest(sg), rest(cg));
    // garble/eval parties flip
    for (const auto& s : cg.steps) {
        if (s.is_transfer()) continue;
        if (s.compute().primitive == Primitive::GCGarble) {
            EXPECT_EQ(s.compute().party, Party::Client);
        }
        if (s.compute().primitive == Primitive::GCEval) {
            EXPECT_EQ(s.compute().party, Party::Server);
        }
    }
}

TEST(BuildTrace, PhasePartitionCoversAllBytes) {
    const ProtocolTrace tr =
        build_trace(toy_network(), toy_constants(), ProtocolVariant::ClientGarbler);
    const double total = trace_bytes(tr);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, Phase::Offline) + trace_bytes(tr, Phase::Online), total);
    EXPECT_DOUBLE_EQ(trace_bytes(tr, {}, Direction::Upload) +
                         trace_bytes(tr, {}, Direction::Download),
                     total);
}

TEST(BuildTrace, GcBytesExactInBothVariants) {
    const NetworkProfile net = load_network(data_path("networks/resnet18-tinyimagenet.net"));
    const CostConstants c = load_constants(data_path("constants/default.costs"));
    for (auto v : {ProtocolVariant::ServerGarbler, ProtocolVariant::ClientGarbler}) {
        const ProtocolTrace tr = build_trace(net, c, v);
        EXPECT_DOUBLE_EQ(trace_bytes(tr, {}, {}, std::string("gc_material")),
                         static_cast<double>(net.computed_total_relus()) * c.gc_bytes_per_relu);
    }
}

// The offline download is dominated by the garbled-circuit material (~41 GB);
// upload is a small slice of total traffic.
TEST(BuildTrace, BundledServerGarblerDownloadDominates) {
    const NetworkProfile net = load_network(data_path("networks/resnet18-tinyimagenet.net"));
    const CostConstants c = load_constants(data_path("constants/default.costs"));
    const ProtocolTrace tr = build_trace(net, c, ProtocolVariant::ServerGarbler);
    const double off_down = trace_bytes(tr, Phase::Offline, Direction::Download);
    const double gc = trace_bytes(tr, Phase::Offline, Direction::Download,
                                  std::string("gc_material"));
    EXPECT_NEAR(gc, 41e9, 0.03 * 41e9);
    EXPECT_GT(gc / off_down, 0.90);
    const double total = trace_bytes(tr);
    EXPECT_GT(trace_bytes(tr, {}, Direction::Download) / total, 0.80);
    EXPECT_LT(trace_bytes(tr, {}, Direction::Upload) / total, 0.10);
}

TEST(TraceDump, ToyGolden) {
    const ProtocolTrace tr =
        build_trace(toy_network(), toy_constants(), ProtocolVariant::ServerGarbler);
    const std::string expected =
        "trace toy server_garbler\n"
        "offline transfer up he_shares bytes=1000\n"
        "offline compute server he ref_s=2 layers=1\n"
        "offline transfer down he_shares bytes=1000\n"
        "offline compute server gc_garble ref_s=0.001\n"
        "offline transfer down gc_material bytes=1.82e+06\n"
        "offline transfer up ot_offline bytes=50000\n"
        "offline transfer down ot_offline bytes=100000\n"
        "online transfer up input_share bytes=80\n"
        "online transfer down labels bytes=59600\n"
        "online compute client gc_eval ref_s=0.002\n"
        "online transfer up labels bytes=59600\n"
        "online compute server ss ref_s=0.1\n";
    EXPECT_EQ(dump(tr), expected);
}

TEST(BuildTrace, EmptyFilterIsGrandTotal) {
    const ProtocolTrace tr =
        build_trace(toy_network(), toy_constants(), ProtocolVariant::ServerGarbler);
    double manual = 0.0;
    for (const auto& s : tr.steps)
        if (s.is_transfer()) manual += s.transfer().bytes;
    EXPECT_DOUBLE_EQ(trace_bytes(tr), manual);
}

}  // namespace
