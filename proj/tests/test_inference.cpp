#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mast/error.hpp"
#include "mast/inference.hpp"
#include "mast/training.hpp"
#include "support/enumeration_oracle.hpp"
#include "support/fixtures.hpp"
#include "support/random_diagram.hpp"

using namespace mast;
using namespace mast::inference;
using mast::testing::child_node;
using mast::testing::enumerate_oracle;
using mast::testing::random_diagram;
using mast::testing::random_distribution;
using mast::testing::random_evidence;
using mast::testing::root_node;

namespace {

// Two roots feeding a child, plus a utility on the child.
InfluenceDiagram sprinkler() {
    InfluenceDiagram d;
    d.chance_nodes.push_back(root_node("rain", {"y", "n"}, {0.2, 0.8}));
    d.chance_nodes.push_back(root_node("sprinkler", {"on", "off"}, {0.4, 0.6}));
    d.chance_nodes.push_back(child_node("wet", {"y", "n"}, {"rain", "sprinkler"},
                                        {{0.99, 0.01}, {0.8, 0.2}, {0.9, 0.1}, {0.0, 1.0}}));
    d.utility_nodes.push_back({"u", "U", {"wet"}, {-10.0, 5.0}});
    return d;
}

std::string first_state_id(const InfluenceDiagram& d) { return d.chance_nodes.front().id; }

}  // namespace

TEST_CASE("hand-computed posterior on a small network") {
    const auto d = sprinkler();
    // P(wet=y) = 0.2*0.4*0.99 + 0.2*0.6*0.8 + 0.8*0.4*0.9 + 0 = 0.4632
    const auto p = posterior(d, {}, "wet");
    CHECK(p.probability_of("y") == doctest::Approx(0.4632).epsilon(1e-14));
    // P(rain=y | wet=y) = (0.0792 + 0.096) / 0.4632
    const auto r = posterior(d, {{{"wet", "y"}}}, "rain");
    CHECK(r.probability_of("y") == doctest::Approx(0.1752 / 0.4632).epsilon(1e-14));
    CHECK(expected_utility(d, {}) == doctest::Approx(0.4632 * -10.0 + 0.5368 * 5.0).epsilon(1e-14));
}

TEST_CASE("observed query node is a point mass") {
    const auto d = sprinkler();
    const auto p = posterior(d, {{{"rain", "n"}}}, "rain");
    CHECK(p.probabilities == std::vector<double>{0.0, 1.0});
}

TEST_CASE("evidence errors") {
    const auto d = sprinkler();
    CHECK_THROWS_AS(posterior(d, {{{"ghost", "y"}}}, "wet"), ArgumentError);
    CHECK_THROWS_AS(posterior(d, {{{"rain", "maybe"}}}, "wet"), ArgumentError);
    CHECK_THROWS_AS(posterior(d, {}, "u"), ArgumentError);
    // No rain and sprinkler off never leaves the grass wet.
    CHECK_THROWS_AS(posterior(d, {{{"rain", "n"}, {"sprinkler", "off"}, {"wet", "y"}}}, "wet"),
                    ImpossibleEvidenceError);
}

TEST_CASE("invalid diagrams are refused before inference") {
    auto d = sprinkler();
    d.chance_nodes[0].prior = std::vector<double>{0.5, 0.6};
    CHECK_THROWS_AS(posterior(d, {}, "wet"), ValidationError);
}

TEST_CASE("state-space cap applies to the full joint space") {
    InfluenceDiagram d;
    for (int i = 0; i < 13; ++i) {
        d.chance_nodes.push_back(root_node("n" + std::to_string(i), {"a", "b", "c"}, {0.2, 0.3, 0.5}));
    }
    // 3^13 = 1594323 > 10^6
    CHECK_THROWS_AS(posterior(d, {}, "n0"), ModelTooLargeError);
    Options small;
    small.max_joint_states = 26;
    d.chance_nodes.resize(3);
    CHECK_THROWS_AS(posterior(d, {}, "n0", small), ModelTooLargeError);
    small.max_joint_states = 27;
    CHECK(posterior(d, {}, "n0", small).probability_of("c") == doctest::Approx(0.5));
}

TEST_CASE("property: posterior and expected utility match the brute-force oracle") {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const auto d = random_diagram(rng);
        const auto e = random_evidence(rng, d);
        for (const auto& node : d.chance_nodes) {
            const auto expected = enumerate_oracle(d, e, node.id);
            if (expected.evidence_probability == 0.0L) continue;
            const auto got = infer(d, e, node.id);
            REQUIRE(got.posterior.probabilities.size() == expected.posterior.size());
            for (std::size_t s = 0; s < expected.posterior.size(); ++s) {
                CHECK(std::fabs(got.posterior.probabilities[s] - static_cast<double>(expected.posterior[s])) <= 1e-12);
            }
            CHECK(std::fabs(got.expected_utility - static_cast<double>(expected.expected_utility)) <=
                  1e-12 * std::max(1.0, std::fabs(static_cast<double>(expected.expected_utility))));
            ++checked;
        }
    }
    CHECK(checked > 500);
}

TEST_CASE("property: posteriors are normalized") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_diagram(rng);
        const auto e = random_evidence(rng, d);
        for (const auto& node : d.chance_nodes) {
            const auto p = posterior(d, e, node.id);
            double sum = 0.0;
            for (double v : p.probabilities) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
                sum += v;
            }
            CHECK(std::fabs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("property: certain evidence is idempotent") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto d = random_diagram(rng);
        const auto e = random_evidence(rng, d);
        // A deterministic child always lands in its first state, so P(first) = 1.
        const auto& parent = d.chance_nodes[rng() % d.chance_nodes.size()];
        const std::size_t columns = parent.scale.size();
        d.chance_nodes.push_back(child_node("z_certain", {"on", "off"}, {parent.id},
                                            std::vector<std::vector<double>>(columns, {1.0, 0.0})));
        auto with = e;
        with.assignments["z_certain"] = "on";
        // Repeating evidence already present must also change nothing.
        auto repeated = e;
        if (!e.assignments.empty()) repeated.assignments.insert(*e.assignments.begin());
        for (const auto& node : d.chance_nodes) {
            const auto before = infer(d, e, node.id);
            const auto after = infer(d, with, node.id);
            const auto again = infer(d, repeated, node.id);
            for (std::size_t s = 0; s < before.posterior.probabilities.size(); ++s) {
                CHECK(std::fabs(before.posterior.probabilities[s] - after.posterior.probabilities[s]) <= 1e-12);
                CHECK(before.posterior.probabilities[s] == again.posterior.probabilities[s]);
            }
            CHECK(std::fabs(before.expected_utility - after.expected_utility) <=
                  1e-12 * std::max(1.0, std::fabs(before.expected_utility)));
        }
    }
}

TEST_CASE("property: barren nodes do not affect the query") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_diagram(rng);
        const auto e = random_evidence(rng, d);
        auto extended = d;
        std::vector<std::string> parents;
        for (const auto& node : d.chance_nodes) {
            if (parents.size() < 2 && rng() % 2 == 0) parents.push_back(node.id);
        }
        if (parents.empty()) {
            extended.chance_nodes.push_back(root_node("barren", {"a", "b", "c"}, random_distribution(rng, 3)));
        } else {
            std::size_t columns = 1;
            for (const auto& p : parents) columns *= d.find_chance(p)->scale.size();
            std::vector<std::vector<double>> table;
            for (std::size_t c = 0; c < columns; ++c) table.push_back(random_distribution(rng, 3));
            extended.chance_nodes.push_back(child_node("barren", {"a", "b", "c"}, parents, table));
        }
        for (const auto& node : d.chance_nodes) {
            const auto without = infer(d, e, node.id);
            const auto with = infer(extended, e, node.id);
            for (std::size_t s = 0; s < without.posterior.probabilities.size(); ++s) {
                CHECK(std::fabs(without.posterior.probabilities[s] - with.posterior.probabilities[s]) <= 1e-12);
            }
            CHECK(std::fabs(without.expected_utility - with.expected_utility) <=
                  1e-12 * std::max(1.0, std::fabs(without.expected_utility)));
        }
    }
}

TEST_CASE("property: expected utility scales linearly with the utilities") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> factor(-50.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_diagram(rng);
        const auto e = random_evidence(rng, d);
        const double base = expected_utility(d, e);

        // Power-of-two factors are exact in binary floating point.
        for (double k : {2.0, 0.25, -8.0, 0.0}) {
            auto scaled = d;
            for (auto& u : scaled.utility_nodes)
                for (auto& v : u.utilities) v *= k;
            CHECK(expected_utility(scaled, e) == k * base);
        }
        const double k = factor(rng);
        auto scaled = d;
        for (auto& u : scaled.utility_nodes)
            for (auto& v : u.utilities) v *= k;
        CHECK(std::fabs(expected_utility(scaled, e) - k * base) <= 1e-12 * std::max(1.0, std::fabs(k * base)));
    }
}

TEST_CASE("property: results do not depend on declaration order") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_diagram(rng);
        const auto e = random_evidence(rng, d);
        auto shuffled = d;
        std::shuffle(shuffled.chance_nodes.begin(), shuffled.chance_nodes.end(), rng);
        std::shuffle(shuffled.utility_nodes.begin(), shuffled.utility_nodes.end(), rng);
        const auto q = first_state_id(d);
        const auto a = infer(d, e, q);
        const auto b = infer(shuffled, e, q);
        CHECK(a.posterior.probabilities == b.posterior.probabilities);
        CHECK(a.expected_utility == b.expected_utility);
    }
}

TEST_CASE("single-pass infer agrees with separate calls") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = random_diagram(rng);
        const auto e = random_evidence(rng, d);
        const auto q = first_state_id(d);
        const auto both = infer(d, e, q);
        CHECK(both.posterior.probabilities == posterior(d, e, q).probabilities);
        CHECK(both.expected_utility == expected_utility(d, e));
    }
}

TEST_CASE("sensitivity rows equal forced-evidence inference") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = random_diagram(rng, {4, 3, 3, 2});
        if (d.chance_nodes.size() < 2) continue;
        const auto e = random_evidence(rng, d, 0.3);
        const auto& query = d.chance_nodes.back();
        const auto& vary = d.chance_nodes.front();
        SensitivityResult s;
        try {
            s = sensitivity(d, e, query.id, vary.id);
        } catch (const ImpossibleEvidenceError&) {
            continue;
        }
        CHECK(s.designated_state == query.scale.states.front());
        REQUIRE(s.rows.size() == vary.scale.size());
        double lo = 1.0;
        double hi = 0.0;
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            auto forced = e;
            forced.assignments[vary.id] = vary.scale.states[i];
            const auto direct = infer(d, forced, query.id);
            CHECK(s.rows[i].state == vary.scale.states[i]);
            CHECK(s.rows[i].posterior.probabilities == direct.posterior.probabilities);
            CHECK(s.rows[i].expected_utility == direct.expected_utility);
            lo = std::min(lo, direct.posterior.probabilities.front());
            hi = std::max(hi, direct.posterior.probabilities.front());
        }
        CHECK(s.spread == hi - lo);
    }
}

TEST_CASE("sensitivity argument errors") {
    const auto d = sprinkler();
    CHECK_THROWS_AS(sensitivity(d, {}, "wet", "wet"), ArgumentError);
    CHECK_THROWS_AS(sensitivity(d, {}, "wet", "ghost"), ArgumentError);
    CHECK_THROWS_AS(sensitivity(d, {}, "wet", "rain", std::string("soggy")), ArgumentError);
    const auto s = sensitivity(d, {}, "wet", "rain", std::string("n"));
    CHECK(s.designated_state == "n");
}
