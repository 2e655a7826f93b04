#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <algorithm>
#include <fstream>

#include "pisim/data.hpp"
#include "pisim/records.hpp"

using namespace pisim;

namespace {

std::string data_path(const std::string& rel) {
    return std::string(PISIM_DATA_DIR) + "/" + rel;
}

std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "pisim_test_data";
    std::filesystem::create_directories(p);
    return p;
}

std::string write_temp(const std::string& name, const std::string& body) {
    const auto p = temp_dir() / name;
    std::ofstream out(p);
    out << body;
    return p.string();
}

TEST(Config, BundledTable1PresetResolves) {
    const LoadedConfig lc = load_config(data_path("presets/table1.cfg"));
    EXPECT_EQ(lc.scenario.protocol.variant, ProtocolVariant::ServerGarbler);
    EXPECT_FALSE(lc.scenario.protocol.lphe_enabled);
    EXPECT_EQ(lc.scenario.protocol.wsa_mode, WsaMode::EvenSplit);
    EXPECT_DOUBLE_EQ(lc.scenario.link.total_bandwidth_bps, 1e9);
    EXPECT_DOUBLE_EQ(lc.scenario.link.upload_fraction, 0.5);
    EXPECT_EQ(lc.scenario.network.name, "resnet18-tinyimagenet");
    // defaults recorded with provenance
    bool seed_defaulted = false;
    for (const auto& [k, v, src] : lc.provenance)
        if (k == "sim.seed" && src == "default") seed_defaulted = true;
    EXPECT_TRUE(seed_defaulted);
}

TEST(Config, EmptyFileRejectedNetworkMandatory) {
    const std::string p = write_temp("empty.cfg", "");
    try {
        load_config(p);
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("network"), std::string::npos);
    }
}

TEST(Config, UploadFractionBoundViolationNamesLinkProfile) {
    const std::string p = write_temp("badfrac.cfg",
                                     "network = " + data_path("networks/resnet18-cifar100.net") +
                                         "\nconstants = " + data_path("constants/default.costs") +
                                         "\nclient_device = " + data_path("devices/client-atom.dev") +
                                         "\nserver_device = " + data_path("devices/server-epyc.dev") +
                                         "\nlink.upload_fraction = 1.2\n");
    try {
        load_config(p);
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("LinkProfile"), std::string::npos);
        EXPECT_NE(msg.find("upload_fraction"), std::string::npos);
    }
}

TEST(Config, UnknownKeysRejectedWithLine) {
    const std::string p = write_temp("unknown.cfg",
                                     "network = " + data_path("networks/resnet18-cifar100.net") +
                                         "\nconstants = " + data_path("constants/default.costs") +
                                         "\nclient_device = " + data_path("devices/client-atom.dev") +
                                         "\nserver_device = " + data_path("devices/server-epyc.dev") +
                                         "\nbogus_key = 1\n");
    try {
        load_config(p);
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
    }
}

TEST(Config, ParseErrorCarriesLineContext) {
    const std::string p = write_temp("syntax.cfg", "network data/x.net\n");
    try {
        load_config(p);
        FAIL() << "expected error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos);
    }
}

TEST(Config, RationalRatesParse) {
    TextKv kv = TextKv::parse("r = 1/7200\n");
    EXPECT_DOUBLE_EQ(kv.get_number("r"), 1.0 / 7200.0);
    TextKv kv2 = TextKv::parse("r = 2.5e-4\n");
    EXPECT_DOUBLE_EQ(kv2.get_number("r"), 2.5e-4);
}

TEST(Config, ScenarioSpecsParse) {
    const ScenarioSpec sg = parse_scenario_spec("sg:64e9");
    EXPECT_EQ(sg.variant, ProtocolVariant::ServerGarbler);
    EXPECT_FALSE(sg.lphe);
    EXPECT_DOUBLE_EQ(sg.client_storage_bytes, 64e9);
    const ScenarioSpec cg = parse_scenario_spec("cg_opt:16e9");
    EXPECT_EQ(cg.variant, ProtocolVariant::ClientGarbler);
    EXPECT_TRUE(cg.lphe);
    EXPECT_EQ(cg.wsa, WsaMode::Optimized);
    EXPECT_THROW(parse_scenario_spec("zz:1"), std::runtime_error);
}

TEST(Config, AllBundledPresetsLoad) {
    for (const auto& entry :
         std::filesystem::directory_iterator(data_path("presets"))) {
        if (entry.path().extension() != ".cfg") continue;
        EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
    }
}

TEST(Records, RoundTripBitForBit) {
    RecordTable t;
    t.name = "probe";
    t.columns = {"a", "b_s", "c_bytes"};
    t.add_row({"x", fmt_double(1.0 / 3.0), fmt_double(42.4983)});
    t.add_row({"y", fmt_double(-1.7976931348623157e308), fmt_double(5e-324)});
    t.add_row({"z", fmt_double(0.1 + 0.2), "0"});
    const auto p = (temp_dir() / "probe.csv").string();
    write_records(t, p, "2020-01-01T00:00:00Z");
    const RecordTable back = read_records(p);
    EXPECT_EQ(back.name, t.name);
    EXPECT_EQ(back.columns, t.columns);
    ASSERT_EQ(back.rows, t.rows);
    // numeric cells reparse to identical doubles
    for (const auto& row : back.rows) {
        const double v = std::stod(row[1]);
        EXPECT_EQ(fmt_double(v), row[1]);
    }
}

TEST(Records, FmtDoubleShortestFaithful) {
    for (double v : {0.5, 1.0 / 3.0, 42.4983, 1e-300, 123456789.123456789, 2052.2083}) {
        const std::string s = fmt_double(v);
        EXPECT_EQ(std::stod(s), v) << s;
    }
}

TEST(Cli, SweepWithOneRateMatchesSimulate) {
    namespace fs = std::filesystem;
    const fs::path tmp = temp_dir() / "cli_consistency";
    fs::remove_all(tmp);
    const std::string cfg = data_path("presets/fig8.cfg");
    auto run_cli = [&](const std::string& args, const std::string& out) {
        std::ostringstream cmd;
        cmd << PISIM_CLI_PATH << " " << args << " --config " << cfg << " --seed 5 --runs 6 "
            << "--out " << (tmp / out).string() << " >/dev/null 2>&1";
        return std::system(cmd.str().c_str());
    };
    ASSERT_EQ(run_cli("simulate", "a"), 0);
    ASSERT_EQ(run_cli("sweep --rates 1/7200", "b"), 0);
    const RecordTable sim = read_records((tmp / "a" / "simulate.csv").string());
    const RecordTable swp = read_records((tmp / "b" / "sweep.csv").string());
    ASSERT_EQ(swp.rows.size(), 1u);
    ASSERT_EQ(sim.rows.size(), 6u);
    // aggregate the per-run file the same way sweep does and compare
    std::vector<double> lat;
    for (const auto& row : sim.rows) lat.push_back(std::stod(row[2]));
    std::sort(lat.begin(), lat.end());
    double mean = 0.0;
    for (double v : lat) mean += v;
    mean /= lat.size();
    EXPECT_DOUBLE_EQ(std::stod(swp.rows[0][3]), mean);
}

TEST(Network, BadKindRejected) {
    const std::string p = write_temp("bad.net",
                                     "name = x\ninput_bytes = 1\ntotal_relus = 1\n"
                                     "n_linear = 1\nn_layers = 1\nlayer.0.kind = conv\n");
    EXPECT_THROW(load_network(p), std::runtime_error);
}

TEST(Constants, OrderingInvariantEnforced) {
    const std::string p = write_temp("bad.costs",
                                     "gc_bytes_per_relu = 100\n"
                                     "garbler_encoding_bytes_per_relu = 200\n"
                                     "gc_garble_s_per_relu_ref = 0\ngc_eval_s_per_relu_ref = 0\n"
                                     "ot_offline_bytes_per_relu = 0\not_online_bytes_per_relu = 0\n"
                                     "label_bytes_per_relu = 0\nss_online_s = 0\n"
                                     "randomness_bytes_per_element = 0\n");
    EXPECT_THROW(load_constants(p), std::runtime_error);
}

}  // namespace
