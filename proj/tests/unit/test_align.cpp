#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "stratx/align.hpp"
#include "stratx/errors.hpp"
#include "test_support.hpp"

using namespace stratx;
using namespace stratx::testing;

namespace {

const std::vector<Event> kExampleA =
    events(EnvId::pacman, {"move", "collect dot", "move", "move", "collect power-up", "move", "kill a ghost"});
const std::vector<Event> kExampleB =
    events(EnvId::pacman, {"move", "collect power-up", "move", "collect dot", "move", "kill a ghost"});

double example_reward(const Event& e) {
    if (e.label == "collect dot") return 10.0;
    if (e.label == "collect power-up") return 50.0;
    if (e.label == "kill a ghost") return 200.0;
    return 0.0;
}

WeightFunction reward_weight(const std::vector<Event>& a, const std::vector<Event>& b) {
    return [&a, &b](std::size_t i, std::size_t j) { return std::max({1.0, example_reward(a[i]), example_reward(b[j])}); };
}

WeightFunction unit_weight() {
    return [](std::size_t, std::size_t) { return 1.0; };
}

void check_matrix_shape(const ScoreMatrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            CHECK(m.value(i, j) >= 0.0);
            CHECK((m.pred(i, j) == Pred::none) == (m.value(i, j) == 0.0));
            if (i == 0 || j == 0) CHECK(m.value(i, j) == 0.0);
        }
    }
}

}  // namespace

TEST_CASE("align params validation") {
    CHECK_NOTHROW(AlignParams{}.validate());
    CHECK_THROWS_AS((AlignParams{0.0, -1.0, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((AlignParams{1.0, 0.5, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((AlignParams{1.0, -1.0, -1.0}.validate()), ConfigError);
}

TEST_CASE("reward-weighted worked example yields the shared plan") {
    const ScoreMatrix m = build_matrix(kExampleA, kExampleB, AlignParams{}, reward_weight(kExampleA, kExampleB));
    check_matrix_shape(m);
    const auto best = m.max_cell();
    CHECK(best.row == 7);
    CHECK(best.col == 6);
    CHECK(best.value == 252.0);
    const Strategy s = traceback(m, kExampleA, kExampleB);
    CHECK(s.events == events(EnvId::pacman, {"move", "collect power-up", "move", "kill a ghost"}));
    CHECK(is_subtrajectory(s.events, kExampleB));
}

TEST_CASE("single matching element scores its weight") {
    const auto a = events(EnvId::pacman, {"kill a ghost"});
    const ScoreMatrix m = build_matrix(a, a, AlignParams{}, [](std::size_t, std::size_t) { return 3.0; });
    CHECK(m.value(1, 1) == 3.0);
    CHECK(m.pred(1, 1) == Pred::diagonal);
}

TEST_CASE("identical sequences align to themselves") {
    const auto a = events(EnvId::pacman, {"move", "collect dot", "collect power-up", "kill a ghost"});
    const LocalAlignment classic = classic_sw(a, a, AlignParams{1.0, -1.0, 1.0});
    CHECK(classic.score == 4.0);
    CHECK(classic.strategy.events == a);
    CHECK(traceback(build_matrix(a, a, AlignParams{}, unit_weight()), a, a).events == a);
}

TEST_CASE("disjoint alphabets give an empty alignment") {
    const auto a = events(EnvId::pacman, {"move", "move"});
    const auto b = events(EnvId::pacman, {"collect dot", "kill a ghost"});
    const LocalAlignment r = classic_sw(a, b, AlignParams{});
    CHECK(r.score == 0.0);
    CHECK(r.strategy.empty());
    CHECK(align_weighted(a, b, LikelihoodTable{}).empty());
    CHECK(classic_sw({}, b, AlignParams{}).strategy.empty());
    CHECK(classic_sw({}, b, AlignParams{}).score == 0.0);
}

TEST_CASE("unit weights with zero gap reduce to the classic matrix") {
    Rng rng(31);
    for (int k = 0; k < 300; ++k) {
        const auto a = random_sequence(rng, EnvId::pacman, 8, 4);
        const auto b = random_sequence(rng, EnvId::pacman, 8, 4);
        const ScoreMatrix weighted = build_matrix(a, b, AlignParams{}, unit_weight());
        const LocalAlignment classic = classic_sw(a, b, AlignParams{1.0, -1.0, 0.0});
        CHECK(weighted == classic.matrix);
    }
}

TEST_CASE("classic and weighted scores match the exhaustive oracle") {
    Rng rng(8);
    for (int k = 0; k < 300; ++k) {
        const auto a = random_sequence(rng, EnvId::dungeon_crawler, 6, 4);
        const auto b = random_sequence(rng, EnvId::dungeon_crawler, 6, 4);
        const double gap = static_cast<double>(uniform_index(rng, 3)) * 0.5;
        const AlignParams classic{1.0, -1.0, gap};
        CHECK(classic_sw(a, b, classic).score ==
              doctest::Approx(brute_force_local_score(a, b, 1.0, -1.0, gap, unit_weight())).epsilon(1e-12));

        std::vector<double> w(a.size() * b.size());
        for (double& x : w) x = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const WeightFunction weight = [&](std::size_t i, std::size_t j) { return w[i * b.size() + j]; };
        const ScoreMatrix m = build_matrix(a, b, AlignParams{}, weight);
        check_matrix_shape(m);
        CHECK(std::abs(max_value(m) - brute_force_local_score(a, b, 1.0, -1.0, 0.0, weight)) <= 1e-12);
    }
}

TEST_CASE("maximal score is symmetric under swapping inputs") {
    Rng rng(12);
    for (int k = 0; k < 300; ++k) {
        const auto a = random_sequence(rng, EnvId::bank_heist, 9, 5);
        const auto b = random_sequence(rng, EnvId::bank_heist, 9, 5);
        LikelihoodTable table;
        for (auto label : event_vocabulary(EnvId::bank_heist)) {
            table.set(ev(EnvId::bank_heist, std::string(label)),
                      LikelihoodEntry{std::uniform_real_distribution<double>(0.0, 1.0)(rng), 0.0, 0.0});
        }
        const WeightFunction ab = [&](std::size_t i, std::size_t j) { return std::max(table.at(a[i]), table.at(b[j])); };
        const WeightFunction ba = [&](std::size_t i, std::size_t j) { return std::max(table.at(b[i]), table.at(a[j])); };
        CHECK(max_value(build_matrix(a, b, AlignParams{}, ab)) == max_value(build_matrix(b, a, AlignParams{}, ba)));
    }
}

TEST_CASE("traceback output is a subtrajectory of the shorter input") {
    Rng rng(404);
    for (int k = 0; k < 1000; ++k) {
        const auto a = random_sequence(rng, EnvId::pacman, 12, 4);
        const auto b = random_sequence(rng, EnvId::pacman, 12, 4);
        LikelihoodTable table{{pac("move"), 0.0}, {pac("collect dot"), 0.1}, {pac("collect power-up"), 0.8}};
        const Strategy s = align_weighted(a, b, table);
        const auto& shorter = b.size() < a.size() ? b : a;
        CHECK(is_subtrajectory(s.events, shorter));
        CHECK(s == align_weighted(a, b, table));
    }
}

TEST_CASE("equal-length inputs draw elements from the first") {
    const auto a = events(EnvId::pacman, {"collect power-up", "kill a ghost"});
    const auto b = events(EnvId::pacman, {"collect power-up", "kill a ghost"});
    CHECK(traceback(build_matrix(a, b, AlignParams{}, unit_weight()), a, b).events == a);
}

TEST_CASE("likelihood weighting keeps power-up before the kill") {
    const LikelihoodTable table{
        {pac("move"), 0.0}, {pac("collect dot"), 0.1}, {pac("collect power-up"), 0.8}, {pac("kill a ghost"), 1.0}};
    const auto a = events(EnvId::pacman, {"collect dot", "collect power-up", "collect dot", "kill a ghost"});
    const auto b = events(EnvId::pacman, {"collect power-up", "kill a ghost"});
    const Strategy s = align_weighted(a, b, table);
    CHECK(s.events == b);

    // All likelihoods 1 matches the unweighted modified alignment.
    Rng rng(6);
    for (int k = 0; k < 100; ++k) {
        const auto x = random_sequence(rng, EnvId::pacman, 8, 4);
        const auto y = random_sequence(rng, EnvId::pacman, 8, 4);
        CHECK(align_weighted(x, y, LikelihoodTable{}) == traceback(build_matrix(x, y, AlignParams{}, unit_weight()), x, y));
    }
}

TEST_CASE("zero-likelihood shared events give no positive score") {
    const LikelihoodTable table{{pac("move"), 0.0}, {pac("collect dot"), 0.0}};
    const auto a = events(EnvId::pacman, {"move", "collect dot", "move"});
    const auto b = events(EnvId::pacman, {"collect dot", "move"});
    const ScoreMatrix m = build_matrix(a, b, AlignParams{}, [&](std::size_t i, std::size_t j) {
        return std::max(table.at(a[i]), table.at(b[j]));
    });
    CHECK(max_value(m) == 0.0);
    CHECK(align_weighted(a, b, table).empty());
}

TEST_CASE("max cell tie-break prefers the latest diagonal, then the smallest row") {
    ScoreMatrix m(3, 3);
    m.set(1, 2, 5.0, Pred::diagonal);
    m.set(2, 1, 5.0, Pred::diagonal);
    m.set(1, 1, 5.0, Pred::diagonal);
    const auto c = m.max_cell();
    CHECK(c.row == 1);
    CHECK(c.col == 2);
    m.set(2, 2, 5.0, Pred::left);
    CHECK(m.max_cell().row == 2);
}

TEST_CASE("matrix dump marks the traceback path") {
    const ScoreMatrix m = build_matrix(kExampleA, kExampleB, AlignParams{}, reward_weight(kExampleA, kExampleB));
    const std::string text = dump_matrix(m, kExampleA, kExampleB);
    CHECK(text.find("252\\*") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(kExampleA.size() + 2));
}
