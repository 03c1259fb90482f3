#include <doctest.h>

#include "lgf/config.hpp"

using lgf::CliConfig;

TEST_CASE("empty config resolves to the stock defaults") {
    const CliConfig cfg = lgf::parse_config_text("", {});
    CHECK(cfg.train.window_length == 100);
    CHECK(cfg.train.stride == 1);
    CHECK(cfg.train.corr_threshold == 0.5);
    CHECK(cfg.train.lr == 0.003);
    CHECK(cfg.train.batch == 32);
    CHECK(cfg.train.supernodes == 8);
    CHECK(cfg.train.sage_layers == 2);
    CHECK(cfg.train.pool_levels == 1);
    CHECK(cfg.train.alpha_pool == 0.1);
    CHECK(cfg.train.ablation == lgf::Variant::full);
    CHECK(cfg.train.epochs == 0);  // deliberately unset; training demands it
    CHECK(cfg.schema.label_column == "faultNumber");
    CHECK(cfg.schema.run_column == "simulationRun");
}

TEST_CASE("command-line overrides beat file values") {
    const CliConfig cfg = lgf::parse_config_text("lr = 0.01\nbatch = 16\n", {"lr=0.003"});
    CHECK(cfg.train.lr == 0.003);
    CHECK(cfg.train.batch == 16);
}

TEST_CASE("unknown keys are hard errors naming the key") {
    CHECK_THROWS_AS(lgf::parse_config_text("widnow_length=100\n", {}), lgf::ConfigError);
    try {
        lgf::parse_config_text("widnow_length=100\n", {});
    } catch (const lgf::ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("widnow_length") != std::string::npos);
        CHECK(msg.find(":1:") != std::string::npos);  // line number
    }
    CHECK_THROWS_AS(lgf::parse_config_text("", {"nonsense=1"}), lgf::ConfigError);
}

TEST_CASE("bad values name the key and line") {
    try {
        lgf::parse_config_text("# comment\nlr=abc\n", {});
        FAIL("expected ConfigError");
    } catch (const lgf::ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("lr") != std::string::npos);
        CHECK(msg.find(":2:") != std::string::npos);
    }
    CHECK_THROWS_AS(lgf::parse_config_text("no_equals_sign\n", {}), lgf::ConfigError);
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
    const CliConfig cfg = lgf::parse_config_text(
        "\n# training\n  window_length = 50  # inline comment\n\nseed=9\nablation=no_gf\n", {});
    CHECK(cfg.train.window_length == 50);
    CHECK(cfg.train.seed == 9);
    CHECK(cfg.train.ablation == lgf::Variant::no_gf);
}

TEST_CASE("schema lists parse as comma-separated values") {
    const CliConfig cfg = lgf::parse_config_text(
        "schema_label=fault\nschema_run=run\nschema_ignore=sample,ts\nschema_variables=a,b,c\n", {});
    CHECK(cfg.schema.label_column == "fault");
    CHECK(cfg.schema.ignore_columns == std::vector<std::string>{"sample", "ts"});
    CHECK(cfg.schema.variable_columns == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("resolved text reparses to the same configuration") {
    const CliConfig cfg = lgf::parse_config_text("lr=0.5\nsupernodes=3\nablation=sage_lstm\nout_dir=results\n", {});
    const CliConfig back = lgf::parse_config_text(cfg.resolved_text(), {});
    CHECK(back.train.lr == cfg.train.lr);
    CHECK(back.train.supernodes == cfg.train.supernodes);
    CHECK(back.train.ablation == cfg.train.ablation);
    CHECK(back.out_dir == cfg.out_dir);
    CHECK(back.resolved_text() == cfg.resolved_text());
}

TEST_CASE("validate() rejects out-of-range settings") {
    CliConfig cfg = lgf::parse_config_text("", {});
    cfg.train.corr_threshold = 1.0;
    CHECK_THROWS_AS(cfg.train.validate(), lgf::ConfigError);
    cfg.train.corr_threshold = 0.5;
    cfg.train.threads = 2;
    CHECK_THROWS_AS(cfg.train.validate(), lgf::ConfigError);
}
