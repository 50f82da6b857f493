#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pcic/survival.hpp"
#include "pcic/transactions.hpp"
#include "pcic/util.hpp"

using namespace pcic;

namespace {

// One user purchasing `category` on the given days, one basket per day.
UserHistory history_on_days(const std::string& user, const std::string& category,
                            const std::vector<int>& days) {
    UserHistory h;
    h.user_id = user;
    for (int day : days) {
        Basket b;
        b.date = day;
        b.order_id = user + "-" + std::to_string(day);
        b.items.push_back({"item", category, 1.0});
        h.baskets.push_back(std::move(b));
    }
    return h;
}

}  // namespace

TEST_CASE("life table for one user with gaps 7, 7, 14 and censor 10") {
    // Purchases on days 0, 7, 14, 28; observation ends at day 38.
    const std::vector<UserHistory> users = {history_on_days("u1", "snacks", {0, 7, 14, 28})};
    const auto table = build_life_table(users, "snacks", 38);

    CHECK(table.n_total == 4);
    CHECK(table.k_max() == 14);
    CHECK(table.n_risk[0] == 4);
    CHECK(table.n_event[7] == 2);
    CHECK(table.n_censor[10] == 1);
    CHECK(table.n_event[14] == 1);
    CHECK(table.n_risk[7] == 4);
    CHECK(table.n_risk[10] == 2);
    CHECK(table.n_risk[14] == 1);

    const auto curves = compute_curves(table);
    CHECK(curves.hazard[7] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(curves.cum_hazard[14] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(curves.survival[14] == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
    CHECK(curves.norm_risk[10] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(curves.norm_event[7] == doctest::Approx(0.5).epsilon(1e-12));

    const auto f = survival_features(curves, 7);
    CHECK(f[0] == doctest::Approx(0.5).epsilon(1e-9));                  // hazard
    CHECK(f[1] == doctest::Approx(0.5).epsilon(1e-9));                  // cum hazard
    CHECK(f[2] == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));       // survival
    CHECK(f[3] == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-9)); // +-3 day mass
    CHECK(f[4] == doctest::Approx(1.0).epsilon(1e-9));                  // norm risk
    CHECK(f[5] == doctest::Approx(0.5).epsilon(1e-9));                  // norm event
}

TEST_CASE("same-day baskets collapse into one purchase event") {
    UserHistory h = history_on_days("u1", "c", {0, 0, 7});
    h.baskets[1].order_id = "other-order";
    const auto table = build_life_table({&h, 1}, "c", 10);
    // One gap event (7) plus one censored observation (3).
    CHECK(table.n_total == 2);
    CHECK(table.n_event[7] == 1);
    CHECK(table.n_censor[3] == 1);
}

TEST_CASE("users who never bought the category contribute nothing") {
    const std::vector<UserHistory> users = {history_on_days("u1", "a", {0, 5}),
                                            history_on_days("u2", "b", {0, 9})};
    const auto table = build_life_table(users, "a", 20);
    CHECK(table.n_total == 2);  // u1's event + u1's censor only
    CHECK_THROWS_AS(build_life_table(users, "nope", 20), SurvivalError);
}

TEST_CASE("every user contributes exactly one censored observation") {
    Rng rng(7101);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<UserHistory> users;
        const int n_users = 1 + static_cast<int>(rng.below(6));
        std::int64_t expected_events = 0;
        for (int u = 0; u < n_users; ++u) {
            std::set<int> days;
            const int n_days = 1 + static_cast<int>(rng.below(8));
            for (int i = 0; i < n_days; ++i) days.insert(static_cast<int>(rng.below(60)));
            expected_events += static_cast<std::int64_t>(days.size()) - 1;
            users.push_back(history_on_days("u" + std::to_string(u), "c",
                                            {days.begin(), days.end()}));
        }
        const auto table = build_life_table(users, "c", 61);
        std::int64_t events = 0, censored = 0;
        for (std::size_t k = 0; k < table.n_event.size(); ++k) {
            events += table.n_event[k];
            censored += table.n_censor[k];
        }
        CHECK(censored == n_users);
        CHECK(events == expected_events);
        CHECK(table.n_total == events + censored);
        CHECK(table.n_risk[0] == table.n_total);
    }
}

TEST_CASE("curves match the day-by-day oracle on random tables") {
    Rng rng(424242);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<oracles::GapObservation> obs;
        const int n = 1 + static_cast<int>(rng.below(40));
        for (int i = 0; i < n; ++i) {
            obs.push_back({static_cast<int>(rng.below(50)), rng.uniform() < 0.7});
        }
        const auto table = oracles::life_table_from_observations(obs);
        const auto expect = oracles::curves_from_table(table);
        const auto got = compute_curves(table, 1);
        REQUIRE(got.hazard.size() == expect.hazard.size());
        for (std::size_t k = 0; k < got.hazard.size(); ++k) {
            CHECK(got.hazard[k] == doctest::Approx(expect.hazard[k]).epsilon(1e-12));
            CHECK(got.cum_hazard[k] == doctest::Approx(expect.cum_hazard[k]).epsilon(1e-12));
            CHECK(got.survival[k] == doctest::Approx(expect.survival[k]).epsilon(1e-12));
            CHECK(got.cum_survival[k] ==
                  doctest::Approx(expect.cum_survival[k]).epsilon(1e-12));
            CHECK(got.norm_risk[k] == doctest::Approx(expect.norm_risk[k]).epsilon(1e-12));
            CHECK(got.norm_event[k] == doctest::Approx(expect.norm_event[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("undersized tables fall back to the trivial curves") {
    // A single purchase yields only the censored observation: one data point.
    const std::vector<UserHistory> users = {history_on_days("u1", "c", {5})};
    const auto table = build_life_table(users, "c", 12);
    CHECK(table.n_total == 1);
    const auto curves = compute_curves(table, 2);
    const auto trivial = trivial_curves();
    CHECK(curves.hazard == trivial.hazard);
    CHECK(curves.survival == trivial.survival);
    CHECK(curves.survival[0] == 1.0);
    CHECK(curves.hazard[0] == 0.0);
    // Lowering the threshold estimates for real.
    const auto real = compute_curves(table, 1);
    CHECK(real.hazard.size() == static_cast<std::size_t>(table.k_max()) + 1);
}

TEST_CASE("survival_features clamps beyond the last observed gap") {
    const std::vector<UserHistory> users = {history_on_days("u1", "c", {0, 4, 8})};
    const auto curves = compute_curves(build_life_table(users, "c", 10));
    const auto at_max = survival_features(curves, curves.k_max());
    const auto beyond = survival_features(curves, curves.k_max() + 500);
    CHECK(at_max == beyond);
    const auto at_zero = survival_features(curves, 0);
    CHECK(at_zero[1] == doctest::Approx(at_zero[0]).epsilon(1e-12));  // cum == instant at k=0
}

TEST_CASE("build_all_life_tables censors at each user's reference minus one") {
    std::vector<UserHistory> users = {history_on_days("u1", "c", {0, 10})};
    SplitResult split;
    split.feature_histories = users;
    split.label_histories = {UserHistory{"u1", {}}};
    split.split_date = 25;
    split.max_date = 31;
    const auto tables = build_all_life_tables(split);
    REQUIRE(tables.count("c") == 1);
    // Censored gap = (25 - 1) - 10 = 14.
    CHECK(tables.at("c").n_censor[14] == 1);
    CHECK(tables.at("c").n_event[10] == 1);
}
