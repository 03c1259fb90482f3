#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lgf/dataset.hpp"
#include "lgf/graph.hpp"

using lgf::CsvSchema;
using lgf::NormStats;
using lgf::SynthConfig;
using lgf::TimeSeriesDataset;
using lgf::WindowedSample;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content) {
        path = std::string("lgf_test_") + name;
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("load_csv parses a two-run toy file") {
    TempFile f("toy.csv",
               "faultNumber,simulationRun,sample,a,b,c\n"
               "1,1,1,0.5,1.5,2.5\n"
               "1,1,2,0.6,1.6,2.6\n"
               "2,1,1,7.0,8.0,9.0\n"
               "2,1,2,7.1,8.1,9.1\n"
               "2,1,3,7.2,8.2,9.2\n");
    const TimeSeriesDataset ds = lgf::load_csv(f.path, CsvSchema{});
    CHECK(ds.variable_count == 3);
    CHECK(ds.variable_names == std::vector<std::string>{"a", "b", "c"});
    CHECK(ds.run_count() == 2);
    CHECK(ds.run_boundaries == std::vector<std::size_t>{0, 2});
    CHECK(ds.run_labels == std::vector<int>{1, 2});
    CHECK(ds.sample_count == 5);
    CHECK(ds.at(0, 0) == 0.5);
    CHECK(ds.at(2, 2) == 9.0);
}

TEST_CASE("load_csv handles the TEP export layout with 52 variable columns") {
    std::string header = "faultNumber,simulationRun,sample";
    for (int i = 1; i <= 41; ++i) header += ",xmeas_" + std::to_string(i);
    for (int i = 1; i <= 11; ++i) header += ",xmv_" + std::to_string(i);
    std::string content = header + "\n";
    for (int row = 0; row < 3; ++row) {
        content += "1,1," + std::to_string(row + 1);
        for (int c = 0; c < 52; ++c) content += "," + std::to_string(0.1 * c + row);
        content += "\n";
    }
    TempFile f("tep52.csv", content);
    const TimeSeriesDataset ds = lgf::load_csv(f.path, CsvSchema{});
    CHECK(ds.variable_count == 52);
    CHECK(ds.variable_names.front() == "xmeas_1");
    CHECK(ds.variable_names.back() == "xmv_11");
    CHECK(ds.run_count() == 1);
    CHECK(ds.sample_count == 3);
}

TEST_CASE("load_csv groups interleaved rows by (run, label) in first-appearance order") {
    TempFile f("interleaved.csv",
               "faultNumber,simulationRun,sample,a,b\n"
               "1,1,1,1,10\n"
               "2,1,1,5,50\n"
               "1,1,2,2,20\n"
               "2,1,2,6,60\n");
    const TimeSeriesDataset ds = lgf::load_csv(f.path, CsvSchema{});
    CHECK(ds.run_count() == 2);
    CHECK(ds.run_labels == std::vector<int>{1, 2});
    CHECK(ds.at(0, 0) == 1.0);
    CHECK(ds.at(1, 0) == 2.0);
    CHECK(ds.at(2, 0) == 5.0);
    CHECK(ds.at(3, 0) == 6.0);
}

TEST_CASE("load_csv error contracts") {
    SUBCASE("missing label column is a schema error naming it") {
        TempFile f("nolabel.csv", "simulationRun,sample,a,b\n1,1,2,3\n");
        CHECK_THROWS_AS(lgf::load_csv(f.path, CsvSchema{}), lgf::SchemaError);
        try {
            lgf::load_csv(f.path, CsvSchema{});
        } catch (const lgf::SchemaError& e) {
            CHECK(std::string(e.what()).find("faultNumber") != std::string::npos);
        }
    }
    SUBCASE("non-numeric cell reports row and column") {
        TempFile f("bad.csv", "faultNumber,simulationRun,sample,a,b\n1,1,1,oops,3\n");
        try {
            lgf::load_csv(f.path, CsvSchema{});
            FAIL("expected ParseError");
        } catch (const lgf::ParseError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("row 1") != std::string::npos);
            CHECK(msg.find("'a'") != std::string::npos);
        }
    }
    SUBCASE("empty data is an error") {
        TempFile f("empty.csv", "faultNumber,simulationRun,sample,a,b\n");
        CHECK_THROWS_AS(lgf::load_csv(f.path, CsvSchema{}), lgf::ParseError);
        TempFile f2("reallyempty.csv", "");
        CHECK_THROWS_AS(lgf::load_csv(f2.path, CsvSchema{}), lgf::ParseError);
    }
    SUBCASE("fewer than 2 variable columns is a schema error") {
        TempFile f("onevar.csv", "faultNumber,simulationRun,sample,a\n1,1,1,2\n");
        CHECK_THROWS_AS(lgf::load_csv(f.path, CsvSchema{}), lgf::SchemaError);
    }
}

TEST_CASE("normalize fits mean 0 / sample std 1 per column") {
    SynthConfig cfg;
    cfg.seed = 9;
    const TimeSeriesDataset ds = lgf::synth_generate(cfg);
    const auto [normed, stats] = lgf::normalize(ds);
    const std::size_t z = normed.sample_count;
    for (std::size_t c = 0; c < normed.variable_count; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < z; ++r) mean += normed.at(r, c);
        mean /= static_cast<double>(z);
        double var = 0.0;
        for (std::size_t r = 0; r < z; ++r) var += (normed.at(r, c) - mean) * (normed.at(r, c) - mean);
        const double sd = std::sqrt(var / static_cast<double>(z - 1));
        CHECK(std::abs(mean) <= 1e-10);
        CHECK(std::abs(sd - 1.0) <= 1e-10);
    }
    CHECK(stats.mean.size() == ds.variable_count);
}

TEST_CASE("normalize: constant column becomes zeros via std fallback") {
    TimeSeriesDataset ds;
    ds.variable_count = 2;
    ds.variable_names = {"const", "ramp"};
    ds.sample_count = 4;
    ds.values = {5, 1, 5, 2, 5, 3, 5, 4};
    ds.run_boundaries = {0};
    ds.run_labels = {1};
    const auto [normed, stats] = lgf::normalize(ds);
    for (std::size_t r = 0; r < 4; ++r) CHECK(normed.at(r, 0) == 0.0);
    CHECK(stats.std[0] == 1.0);
    CHECK(stats.zero_variance_columns == std::vector<std::size_t>{0});
}

TEST_CASE("normalize applies given stats unchanged (test-time path)") {
    TimeSeriesDataset train;
    train.variable_count = 2;
    train.sample_count = 3;
    train.values = {0, 10, 1, 20, 2, 30};
    train.run_boundaries = {0};
    train.run_labels = {1};
    const auto [tn, stats] = lgf::normalize(train);

    TimeSeriesDataset test = train;
    for (double& v : test.values) v += 5.0;  // shifted test data
    const auto [sn, stats2] = lgf::normalize(test, stats);
    double mean0 = (sn.at(0, 0) + sn.at(1, 0) + sn.at(2, 0)) / 3.0;
    CHECK(std::abs(mean0) > 0.1);  // no re-fit: shifted mean stays nonzero
    CHECK(stats2.mean == stats.mean);

    SUBCASE("stats of the wrong width are a dimension error") {
        NormStats bad;
        bad.mean = {0.0};
        bad.std = {1.0};
        CHECK_THROWS_AS(lgf::normalize(test, bad), lgf::DimensionError);
    }

    SUBCASE("applying fixed stats twice composes as an affine map, never a re-fit") {
        const auto [double_applied, s3] = lgf::normalize(sn, stats);
        for (std::size_t i = 0; i < double_applied.values.size(); ++i) {
            const double expect = ((test.values[i] - stats.mean[i % 2]) / stats.std[i % 2] - stats.mean[i % 2]) /
                                  stats.std[i % 2];
            CHECK(double_applied.values[i] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("make_windows counts and boundaries") {
    SUBCASE("Z_r=500, w=100, stride=1 gives 401 windows per run") {
        SynthConfig cfg;
        cfg.classes = 2;
        cfg.variables = 4;
        cfg.runs_per_class = 1;
        cfg.run_length = 500;
        const TimeSeriesDataset ds = lgf::synth_generate(cfg);
        const auto windows = lgf::make_windows(ds, 100, 1);
        CHECK(windows.size() == 2 * 401);
    }
    SUBCASE("run length equal to w gives exactly one window") {
        SynthConfig cfg;
        cfg.classes = 2;
        cfg.variables = 4;
        cfg.runs_per_class = 1;
        cfg.run_length = 20;
        const TimeSeriesDataset ds = lgf::synth_generate(cfg);
        const auto windows = lgf::make_windows(ds, 20, 1);
        CHECK(windows.size() == 2);
        CHECK(windows[0].end_time == 19);
    }
    SUBCASE("stride=w tiles a divisible run without overlap") {
        SynthConfig cfg;
        cfg.classes = 2;
        cfg.variables = 4;
        cfg.runs_per_class = 1;
        cfg.run_length = 60;
        const TimeSeriesDataset ds = lgf::synth_generate(cfg);
        const auto windows = lgf::make_windows(ds, 20, 20);
        CHECK(windows.size() == 2 * 3);
    }
    SUBCASE("a run shorter than w names the run") {
        SynthConfig cfg;
        cfg.classes = 2;
        cfg.variables = 4;
        cfg.runs_per_class = 1;
        cfg.run_length = 10;
        const TimeSeriesDataset ds = lgf::synth_generate(cfg);
        CHECK_THROWS_WITH_AS(lgf::make_windows(ds, 11, 1),
                             "make_windows: run 0 has 10 rows, shorter than window length 11", lgf::ContractError);
    }
}

TEST_CASE("windows never cross run boundaries and reconstruct runs losslessly") {
    SynthConfig cfg;
    cfg.classes = 3;
    cfg.variables = 5;
    cfg.runs_per_class = 2;
    cfg.run_length = 40;
    cfg.seed = 4;
    const TimeSeriesDataset ds = lgf::synth_generate(cfg);
    const std::size_t w = 10;
    const auto windows = lgf::make_windows(ds, w, w);  // stride w tiling
    // Per run: 40/10 = 4 windows; labels constant per run; concatenation
    // reproduces the run rows exactly.
    std::size_t wi = 0;
    for (std::size_t r = 0; r < ds.run_count(); ++r) {
        std::vector<double> rebuilt;
        for (std::size_t kk = 0; kk < 4; ++kk, ++wi) {
            CHECK(windows[wi].run_index == r);
            CHECK(windows[wi].label == ds.run_labels[r]);
            rebuilt.insert(rebuilt.end(), windows[wi].segment.begin(), windows[wi].segment.end());
        }
        const auto begin = ds.values.begin() + static_cast<std::ptrdiff_t>(ds.run_begin(r) * ds.variable_count);
        CHECK(std::equal(rebuilt.begin(), rebuilt.end(), begin));
    }
    CHECK(wi == windows.size());
}

TEST_CASE("synth_generate is bitwise deterministic and balanced") {
    SynthConfig cfg;
    cfg.classes = 4;
    cfg.variables = 8;
    cfg.runs_per_class = 5;
    cfg.run_length = 30;
    cfg.seed = 123;
    const TimeSeriesDataset a = lgf::synth_generate(cfg);
    const TimeSeriesDataset b = lgf::synth_generate(cfg);
    CHECK(a.values == b.values);
    CHECK(a.run_labels == b.run_labels);
    for (int c = 1; c <= 4; ++c) {
        CHECK(std::count(a.run_labels.begin(), a.run_labels.end(), c) == 5);
    }
    CHECK_THROWS_AS(lgf::synth_generate(SynthConfig{1, 4, 1, 30, 0}), lgf::ConfigError);
}

TEST_CASE("synth data separates within-group from cross-group correlation") {
    // Oracle for the planted structure: median over 20 seeds of the mean
    // within-group and cross-group Pearson correlation over a full run.
    std::vector<double> within_meds, cross_meds;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SynthConfig cfg;
        cfg.classes = 2;
        cfg.variables = 8;
        cfg.runs_per_class = 1;
        cfg.run_length = 200;
        cfg.seed = seed;
        const TimeSeriesDataset ds = lgf::synth_generate(cfg);
        const auto partitions = lgf::synth_partitions(cfg);
        double within_sum = 0.0, cross_sum = 0.0;
        std::size_t within_n = 0, cross_n = 0;
        for (std::size_t r = 0; r < ds.run_count(); ++r) {
            const std::vector<int>& part = partitions[static_cast<std::size_t>(ds.run_labels[r] - 1)];
            std::vector<std::vector<double>> cols(ds.variable_count);
            for (std::size_t c = 0; c < ds.variable_count; ++c) {
                for (std::size_t row = ds.run_begin(r); row < ds.run_end(r); ++row) cols[c].push_back(ds.at(row, c));
            }
            for (std::size_t i = 0; i < ds.variable_count; ++i)
                for (std::size_t j = i + 1; j < ds.variable_count; ++j) {
                    const double rho = lgf::pearson(cols[i], cols[j]);
                    if (part[i] == part[j]) {
                        within_sum += rho;
                        ++within_n;
                    } else {
                        cross_sum += rho;
                        ++cross_n;
                    }
                }
        }
        within_meds.push_back(within_sum / static_cast<double>(within_n));
        cross_meds.push_back(std::abs(cross_sum / static_cast<double>(cross_n)));
    }
    std::sort(within_meds.begin(), within_meds.end());
    std::sort(cross_meds.begin(), cross_meds.end());
    CHECK(within_meds[10] >= 0.6);
    CHECK(cross_meds[10] <= 0.3);
}

TEST_CASE("write_csv round-trips through load_csv") {
    SynthConfig cfg;
    cfg.classes = 2;
    cfg.variables = 4;
    cfg.runs_per_class = 2;
    cfg.run_length = 12;
    cfg.seed = 77;
    const TimeSeriesDataset ds = lgf::synth_generate(cfg);
    TempFile f("roundtrip.csv", "");
    lgf::write_csv(ds, f.path);
    const TimeSeriesDataset back = lgf::load_csv(f.path, CsvSchema{});
    CHECK(back.sample_count == ds.sample_count);
    CHECK(back.run_labels == ds.run_labels);
    CHECK(back.run_boundaries == ds.run_boundaries);
    for (std::size_t i = 0; i < ds.values.size(); ++i) {
        CHECK(back.values[i] == doctest::Approx(ds.values[i]).epsilon(1e-15));
    }
}
