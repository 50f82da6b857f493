#include <doctest.h>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pcic/baselines.hpp"
#include "pcic/icrank.hpp"
#include "pcic/metrics.hpp"
#include "pcic/transactions.hpp"
#include "pcic/util.hpp"

using namespace pcic;

namespace {

ItemStats item(const std::string& id, int freq, int days, double nib = 1.0) {
    ItemStats s;
    s.item_id = id;
    s.category_id = "cat";
    s.frequency = freq;
    s.days_since = days;
    s.nib = nib;
    return s;
}

std::vector<std::string> ids_of(const std::vector<RankedItem>& ranked) {
    std::vector<std::string> out;
    for (const auto& r : ranked) out.push_back(r.item_id);
    return out;
}

UserHistory shopper() {
    // day 0: {milk x2, bread}, day 3: {milk x2}, day 8: {bread, eggs x6}
    UserHistory h;
    h.user_id = "u";
    Basket b0;
    b0.date = 0;
    b0.order_id = "o0";
    b0.items = {{"bread", "bakery", 1}, {"milk", "dairy", 2}};
    Basket b1;
    b1.date = 3;
    b1.order_id = "o1";
    b1.items = {{"milk", "dairy", 2}};
    Basket b2;
    b2.date = 8;
    b2.order_id = "o2";
    b2.items = {{"bread", "bakery", 1}, {"eggs", "dairy", 6}};
    h.baskets = {b0, b1, b2};
    return h;
}

}  // namespace

TEST_CASE("blended ranking on the three-item example") {
    const std::vector<ItemStats> items = {item("A", 5, 2), item("B", 3, 1), item("C", 1, 10)};
    IcConfig config;  // alpha = beta = 0.5
    const auto ranked = rank_items_in_category(items, config);
    REQUIRE(ranked.size() == 3);

    // Frequency ranks: A1 B2 C3. Recency ranks: B1 A2 C3.
    // Blend: A and B tie at 1.5; the tie resolves by frequency.
    CHECK(ranked[0].item_id == "A");
    CHECK(ranked[0].freq_rank == 1);
    CHECK(ranked[0].recency_rank == 2);
    CHECK(ranked[0].combined == doctest::Approx(1.5));
    CHECK(ranked[0].rk == 1);
    CHECK(ranked[0].ir == 1);

    CHECK(ranked[1].item_id == "B");
    CHECK(ranked[1].combined == doctest::Approx(1.5));
    CHECK(ranked[1].rk == 2);
    CHECK(ranked[1].ir == 2);

    CHECK(ranked[2].item_id == "C");
    CHECK(ranked[2].rk == 3);
}

TEST_CASE("bulk quantity compresses the rank") {
    // B lands at rk 2; buying it two-per-basket halves the effective slot.
    const std::vector<ItemStats> items = {item("A", 5, 2), item("B", 3, 1, 2.0),
                                          item("C", 1, 10)};
    const auto ranked = rank_items_in_category(items, {});
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].item_id == "A");
    CHECK(ranked[0].ir == 1);
    CHECK(ranked[1].item_id == "B");
    CHECK(ranked[1].rk == 2);
    CHECK(ranked[1].ir == 1);  // ceil(2 / 2): promoted alongside A
    CHECK(ranked[2].item_id == "C");
    CHECK(ranked[2].ir == 3);

    // Disabling the quantity compression keeps ir == rk.
    IcConfig plain;
    plain.use_nib = false;
    for (const auto& r : rank_items_in_category(items, plain)) CHECK(r.ir == r.rk);
}

TEST_CASE("alpha emphasizes recency, beta emphasizes frequency") {
    const std::vector<ItemStats> items = {item("A", 5, 9), item("B", 2, 1)};
    IcConfig recency;
    recency.alpha = 1.0;
    recency.beta = 0.0;
    CHECK(ids_of(rank_items_in_category(items, recency)) ==
          std::vector<std::string>{"B", "A"});
    IcConfig frequency;
    frequency.alpha = 0.0;
    frequency.beta = 1.0;
    CHECK(ids_of(rank_items_in_category(items, frequency)) ==
          std::vector<std::string>{"A", "B"});
}

TEST_CASE("full ties fall back to item_id") {
    const std::vector<ItemStats> items = {item("zeta", 2, 4), item("beta", 2, 4),
                                          item("mu", 2, 4)};
    const auto ranked = rank_items_in_category(items, {});
    CHECK(ids_of(ranked) == std::vector<std::string>{"beta", "mu", "zeta"});
    CHECK(ranked[0].rk == 1);
    CHECK(ranked[1].rk == 2);
    CHECK(ranked[2].rk == 3);
}

TEST_CASE("ranks are always a permutation and output is (ir, rk) sorted") {
    Rng rng(555);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ItemStats> items;
        const int n = 1 + static_cast<int>(rng.below(12));
        for (int i = 0; i < n; ++i) {
            items.push_back(item("i" + std::to_string(i), 1 + static_cast<int>(rng.below(6)),
                                 static_cast<int>(rng.below(30)),
                                 1.0 + static_cast<double>(rng.below(3))));
        }
        IcConfig config;
        config.alpha = rng.uniform();
        config.beta = rng.uniform();
        const auto ranked = rank_items_in_category(items, config);
        REQUIRE(ranked.size() == items.size());
        std::set<int> rks, freq_ranks, rec_ranks;
        for (const auto& r : ranked) {
            rks.insert(r.rk);
            freq_ranks.insert(r.freq_rank);
            rec_ranks.insert(r.recency_rank);
            CHECK(r.ir == static_cast<int>(std::ceil(static_cast<double>(r.rk) / r.nib)));
            CHECK(r.ir >= 1);
            CHECK(r.ir <= r.rk);
        }
        CHECK(rks.size() == items.size());
        CHECK(*rks.begin() == 1);
        CHECK(*rks.rbegin() == static_cast<int>(items.size()));
        CHECK(freq_ranks.size() == items.size());
        CHECK(rec_ranks.size() == items.size());
        for (std::size_t i = 1; i < ranked.size(); ++i) {
            const bool ordered = ranked[i - 1].ir < ranked[i].ir ||
                                 (ranked[i - 1].ir == ranked[i].ir &&
                                  ranked[i - 1].rk < ranked[i].rk);
            CHECK(ordered);
        }
    }
}

TEST_CASE("compute_item_stats aggregates baskets per category") {
    const auto stats = compute_item_stats(shopper(), 10);  // "today" is day 9
    REQUIRE(stats.count("dairy") == 1);
    REQUIRE(stats.count("bakery") == 1);
    REQUIRE(stats.at("dairy").size() == 2);

    const auto& eggs = stats.at("dairy")[0];
    CHECK(eggs.item_id == "eggs");
    CHECK(eggs.frequency == 1);
    CHECK(eggs.days_since == 1);
    CHECK(eggs.nib == doctest::Approx(6.0));

    const auto& milk = stats.at("dairy")[1];
    CHECK(milk.frequency == 2);
    CHECK(milk.days_since == 6);  // last milk basket on day 3
    CHECK(milk.nib == doctest::Approx(2.0));

    const auto& bread = stats.at("bakery")[0];
    CHECK(bread.frequency == 2);
    CHECK(bread.days_since == 1);
    CHECK(bread.nib == doctest::Approx(1.0));
}

TEST_CASE("recall and ndcg match hand values") {
    const std::vector<std::string> ranked = {"a", "b", "c", "d"};
    CHECK(recall_at_k(ranked, {"a", "c"}, 2) == doctest::Approx(0.5));
    CHECK(recall_at_k(ranked, {"a", "c"}, 3) == doctest::Approx(1.0));
    CHECK(recall_at_k(ranked, {"zz"}, 4) == doctest::Approx(0.0));
    CHECK(recall_at_k(ranked, {}, 4) == doctest::Approx(0.0));
    CHECK(recall_at_k(ranked, {"a"}, 0) == doctest::Approx(0.0));

    // Single hit at position 2 (0-based 1): dcg 1/log2(3), idcg 1.
    CHECK(ndcg_at_k(ranked, {"b"}, 3) == doctest::Approx(1.0 / std::log2(3.0)));
    CHECK(ndcg_at_k(ranked, {"a"}, 3) == doctest::Approx(1.0));
    // Both hits up front in either order: perfect.
    CHECK(ndcg_at_k(ranked, {"b", "a"}, 2) == doctest::Approx(1.0));
    // Truth larger than k: ideal is capped at k hits.
    const std::vector<std::string> single = {"a"};
    CHECK(ndcg_at_k(single, {"a", "b", "c"}, 1) == doctest::Approx(1.0));
}

TEST_CASE("metrics agree with the exhaustive oracle on random instances") {
    Rng rng(8080);
    const std::vector<std::string> universe = {"p", "q", "r", "s", "t", "u"};
    for (int trial = 0; trial < 2000; ++trial) {
        std::vector<std::string> ranked;
        const int len = static_cast<int>(rng.below(7));
        for (int i = 0; i < len; ++i) {
            ranked.push_back(universe[rng.below(universe.size())]);  // duplicates allowed
        }
        std::set<std::string> truth;
        const int t = static_cast<int>(rng.below(4));
        for (int i = 0; i < t; ++i) truth.insert(universe[rng.below(universe.size())]);
        const int k = 1 + static_cast<int>(rng.below(7));
        CHECK(recall_at_k(ranked, truth, k) ==
              doctest::Approx(oracles::recall_oracle(ranked, truth, k)).epsilon(1e-12));
        CHECK(ndcg_at_k(ranked, truth, k) ==
              doctest::Approx(oracles::ndcg_oracle(ranked, truth, k)).epsilon(1e-12));
    }
}

TEST_CASE("entries below position k never change the metrics") {
    const std::set<std::string> truth = {"a", "d"};
    const std::vector<std::string> base = {"x", "a", "y", "d", "z", "q"};
    auto tail_swapped = base;
    std::swap(tail_swapped[4], tail_swapped[5]);
    for (int k = 1; k <= 4; ++k) {
        CHECK(recall_at_k(base, truth, k) == recall_at_k(tail_swapped, truth, k));
        CHECK(ndcg_at_k(base, truth, k) == ndcg_at_k(tail_swapped, truth, k));
    }
}

TEST_CASE("summarize computes mean and sample stddev") {
    const std::vector<double> values = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    const auto s = summarize(values);
    CHECK(s.mean == doctest::Approx(5.0));
    CHECK(s.stddev == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-12));
    CHECK(s.values == values);
    CHECK(summarize(std::vector<double>{3.0}).stddev == 0.0);
    CHECK(summarize({}).mean == 0.0);
}

TEST_CASE("baseline rankings order a user's own items") {
    // Corpus: milk in 3 baskets, bread in 2, eggs in 1. Milk repurchased by
    // its only buyer; bread bought once by each of two users.
    UserHistory u1 = shopper();  // milk x2 baskets, bread x2, eggs x1
    UserHistory u2;
    u2.user_id = "v";
    Basket b;
    b.date = 1;
    b.order_id = "vo";
    b.items = {{"milk", "dairy", 1}};
    u2.baskets = {b};
    const std::vector<UserHistory> corpus = {u1, u2};

    const auto popularity = compute_item_popularity(corpus);
    CHECK(popularity.at("milk") == 3);
    CHECK(popularity.at("bread") == 2);
    CHECK(popularity.at("eggs") == 1);

    const auto rates = compute_item_repurchase_rates(corpus);
    CHECK(rates.at("milk") == doctest::Approx(0.5));  // u bought twice, v once
    CHECK(rates.at("bread") == doctest::Approx(1.0)); // sole buyer repurchased
    CHECK(rates.at("eggs") == doctest::Approx(0.0));

    CHECK(topsell_ranking(u1, popularity) ==
          std::vector<std::string>{"milk", "bread", "eggs"});
    CHECK(fbought_ranking(u1) == std::vector<std::string>{"bread", "milk", "eggs"});
    CHECK(rcp_ranking(u1, rates) == std::vector<std::string>{"bread", "milk", "eggs"});
    // v only ever bought milk; baselines never recommend unseen items.
    CHECK(topsell_ranking(u2, popularity) == std::vector<std::string>{"milk"});
}
