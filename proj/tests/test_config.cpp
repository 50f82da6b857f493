#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pcic/config.hpp"

using namespace pcic;

namespace {

std::string temp_config(const std::string& body) {
    static int counter = 0;
    const auto path = std::filesystem::temp_directory_path() /
                      ("pcic_cfg_" + std::to_string(++counter) + ".conf");
    std::ofstream out(path);
    out << body;
    return path.string();
}

}  // namespace

TEST_CASE("defaults cover every registered key") {
    const Config config;
    for (const auto& info : Config::registry()) {
        CHECK(config.has(info.key));
        CHECK(config.get_string(info.key) == info.default_value);
    }
    CHECK(config.get_int("eval.folds") == 5);
    CHECK(config.get_double("ic.alpha") == 0.5);
    CHECK(config.get_bool("ic.use_nib"));
    CHECK(config.get_string("train.optimizer") == "adam");
}

TEST_CASE("files parse comments, blanks and dotted keys") {
    const auto path = temp_config(
        "# survival settings\n"
        "\n"
        "split.label_window_days = 14\n"
        "  ic.alpha=0.8  \n"
        "paths.workdir = /tmp/some where\n"
        "filter.excluded_categories = tobacco, alcohol ,, gift cards\n");
    const auto config = Config::from_file(path);
    CHECK(config.get_int("split.label_window_days") == 14);
    CHECK(config.get_double("ic.alpha") == 0.8);
    CHECK(config.get_string("paths.workdir") == "/tmp/some where");
    CHECK(config.get_list("filter.excluded_categories") ==
          std::vector<std::string>{"tobacco", "alcohol", "gift cards"});
    std::remove(path.c_str());
}

TEST_CASE("unknown keys and type mismatches are rejected with line numbers") {
    const auto unknown = temp_config("no.such.key = 1\n");
    CHECK_THROWS_AS(Config::from_file(unknown), ConfigError);
    std::remove(unknown.c_str());

    const auto bad_type = temp_config("eval.folds = soon\n");
    try {
        Config::from_file(bad_type);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
    std::remove(bad_type.c_str());

    const auto no_equals = temp_config("train.optimizer adam\n");
    CHECK_THROWS_AS(Config::from_file(no_equals), ConfigError);
    std::remove(no_equals.c_str());

    CHECK_THROWS_AS(Config::from_file("/nonexistent/file.conf"), ConfigError);

    Config config;
    CHECK_THROWS_AS(config.set("synth.n_users", "1.5"), ConfigError);
    CHECK_THROWS_AS(config.set("ic.alpha", "high"), ConfigError);
    CHECK_THROWS_AS(config.set("", "1"), ConfigError);
}

TEST_CASE("booleans accept the usual spellings") {
    Config config;
    for (const char* yes : {"true", "1", "yes"}) {
        config.set("split.engaged_only", yes);
        CHECK(config.get_bool("split.engaged_only"));
    }
    for (const char* no : {"false", "0", "no"}) {
        config.set("split.engaged_only", no);
        CHECK(!config.get_bool("split.engaged_only"));
    }
    CHECK_THROWS_AS(config.set("split.engaged_only", "maybe"), ConfigError);
}

TEST_CASE("stats-prefixed keys bypass the registry") {
    Config config;
    config.set("stats.rows", "123");           // manifests write these
    CHECK(config.get_string("stats.rows") == "123");
    CHECK_THROWS_AS(config.set("metrics.rows", "123"), ConfigError);
}

TEST_CASE("write emits a loadable file including stats") {
    Config config;
    config.set("seed", "99");
    config.set("recommend.top_k", "25");
    const auto path = (std::filesystem::temp_directory_path() / "pcic_cfg_rt.conf").string();
    config.write(path, {{"rows", "42"}, {"stats.split_date", "2024-06-01"}});
    const auto back = Config::from_file(path);
    CHECK(back.get_int("seed") == 99);
    CHECK(back.get_int("recommend.top_k") == 25);
    CHECK(back.get_string("stats.rows") == "42");
    CHECK(back.get_string("stats.split_date") == "2024-06-01");
    for (const auto& info : Config::registry()) CHECK(back.has(info.key));
    std::remove(path.c_str());
}

TEST_CASE("later files override earlier values") {
    const auto first = temp_config("seed = 1\nthreads = 2\n");
    const auto second = temp_config("seed = 7\n");
    Config config = Config::from_file(first);
    config.apply_file(second);
    CHECK(config.get_int("seed") == 7);
    CHECK(config.get_int("threads") == 2);
    std::remove(first.c_str());
    std::remove(second.c_str());
}
