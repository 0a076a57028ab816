#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "multike/config.hpp"

using namespace multike;

TEST_CASE("defaults validate and expose every key") {
    TrainConfig cfg;
    cfg.validate();
    CHECK(cfg.epochs == 200);
    CHECK(cfg.lr == 0.001);
    CHECK(cfg.dim == 75);
    CHECK(cfg.negatives == 10);
    CHECK(cfg.alpha1 == 0.6);
    CHECK(cfg.alpha2 == 0.4);
    CHECK(cfg.eta == 0.9);
    CHECK(cfg.combination == "itc");
    CHECK(cfg.use_cra == 1);

    const auto& keys = config_keys();
    CHECK(keys.size() == 26);
    for (const auto& key : keys) {
        // every advertised key reads back and re-applies cleanly
        std::string value = config_get(cfg, key);
        apply_config_kv(cfg, key, value);
        CHECK(config_get(cfg, key) == value);
    }
    CHECK_THROWS_AS(config_get(cfg, "bogus"), std::invalid_argument);
}

TEST_CASE("key-value application parses and rejects by key name") {
    TrainConfig cfg;
    apply_config_kv(cfg, "epochs", "42");
    CHECK(cfg.epochs == 42);
    apply_config_kv(cfg, "lr", "0.25");
    CHECK(cfg.lr == 0.25);
    apply_config_kv(cfg, "combination", "wva");
    CHECK(cfg.combination == "wva");
    apply_config_kv(cfg, "rng_seed", "123456789012345");
    CHECK(cfg.rng_seed == 123456789012345ULL);
    apply_config_kv(cfg, "use_cra", "0");
    CHECK(cfg.use_cra == 0);

    try {
        apply_config_kv(cfg, "epochs", "notanumber");
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("epochs") != std::string::npos);
    }
    try {
        apply_config_kv(cfg, "no_such_key", "1");
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("no_such_key") != std::string::npos);
    }
}

TEST_CASE("validation pins down bad hyper-parameter combinations") {
    auto expect_reject = [](auto mutate) {
        TrainConfig cfg;
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    };
    expect_reject([](TrainConfig& c) { c.epochs = 0; });
    expect_reject([](TrainConfig& c) { c.lr = 0.0; });
    expect_reject([](TrainConfig& c) { c.dim = 0; });
    expect_reject([](TrainConfig& c) { c.negatives = -1; });
    expect_reject([](TrainConfig& c) { c.filters = 0; });
    expect_reject([](TrainConfig& c) { c.kernel = 80; }); // must stay below dim
    expect_reject([](TrainConfig& c) { c.alpha1 = 0.8; }); // alphas must sum to 1
    expect_reject([](TrainConfig& c) { c.eta = 1.5; });
    expect_reject([](TrainConfig& c) { c.eta = -0.1; });
    expect_reject([](TrainConfig& c) { c.norm = "L3"; });
    expect_reject([](TrainConfig& c) { c.batch_size = 0; });
    expect_reject([](TrainConfig& c) { c.combination = "magic"; });
    expect_reject([](TrainConfig& c) { c.seed_ratio = 1.5; });
    expect_reject([](TrainConfig& c) { c.use_cra = 2; });
    expect_reject([](TrainConfig& c) { c.candidates = "everything"; });
    expect_reject([](TrainConfig& c) { c.ssl_epochs = 0; });

    TrainConfig ok;
    ok.alpha1 = 0.7;
    ok.alpha2 = 0.3;
    ok.combination = "ssl";
    ok.candidates = "all";
    ok.seed_ratio = 0.0;
    ok.validate();
}

TEST_CASE("config files carry comments and blank lines") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "multike_test_config.cfg";
    {
        std::ofstream out(path);
        out << "# training setup\n"
            << "epochs = 7\n"
            << "\n"
            << "lr=0.5   # inline comment\n"
            << "combination = wva\n";
    }
    TrainConfig cfg;
    load_config_file(cfg, path.string());
    CHECK(cfg.epochs == 7);
    CHECK(cfg.lr == 0.5);
    CHECK(cfg.combination == "wva");
    CHECK(cfg.dim == 75); // untouched fields keep their defaults
    fs::remove(path);

    CHECK_THROWS(load_config_file(cfg, (fs::temp_directory_path() / "missing.cfg").string()));

    fs::path bad = fs::temp_directory_path() / "multike_test_config_bad.cfg";
    { std::ofstream out(bad); out << "epochs 7\n"; } // missing '='
    CHECK_THROWS(load_config_file(cfg, bad.string()));
    fs::remove(bad);
}

TEST_CASE("environment variables override fields and report what they set") {
    ::setenv("MULTIKE_EPOCHS", "11", 1);
    ::setenv("MULTIKE_COMBINATION", "ssl", 1);
    TrainConfig cfg;
    auto applied = apply_env_overrides(cfg);
    CHECK(cfg.epochs == 11);
    CHECK(cfg.combination == "ssl");
    bool saw_epochs = false;
    for (const auto& key : applied) saw_epochs = saw_epochs || key == "epochs";
    CHECK(saw_epochs);
    ::unsetenv("MULTIKE_EPOCHS");
    ::unsetenv("MULTIKE_COMBINATION");

    TrainConfig clean;
    auto none = apply_env_overrides(clean);
    CHECK(none.empty());
    CHECK(clean.epochs == 200);
}
