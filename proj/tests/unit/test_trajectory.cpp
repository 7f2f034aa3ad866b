#include <doctest.h>

#include <algorithm>

#include "stratx/errors.hpp"
#include "test_support.hpp"

using namespace stratx;
using namespace stratx::testing;

TEST_CASE("environment ids round-trip and reject unknown names") {
    for (EnvId e : {EnvId::pacman, EnvId::dungeon_crawler, EnvId::bank_heist}) {
        CHECK(parse_env_id(to_string(e)) == e);
    }
    CHECK(parse_env_id("dungeon") == EnvId::dungeon_crawler);
    CHECK(parse_env_id("bankheist") == EnvId::bank_heist);
    CHECK_THROWS_AS(parse_env_id("tetris"), ConfigError);
}

TEST_CASE("vocabularies hold the declared labels") {
    auto has = [](EnvId env, std::string_view label) {
        const auto v = event_vocabulary(env);
        return std::find(v.begin(), v.end(), label) != v.end();
    };
    CHECK(event_vocabulary(EnvId::pacman).size() == 4);
    CHECK(has(EnvId::pacman, "collect power-up"));
    CHECK(event_vocabulary(EnvId::dungeon_crawler).size() == 6);
    CHECK(has(EnvId::dungeon_crawler, "collect weapon (gun)"));
    CHECK(has(EnvId::dungeon_crawler, "unlock door"));
    CHECK(event_vocabulary(EnvId::bank_heist).size() == 5);
    CHECK(has(EnvId::bank_heist, "drop dynamite"));
}

TEST_CASE("make_event validates labels against the environment") {
    CHECK(make_event(EnvId::pacman, "move").label == "move");
    CHECK_THROWS_AS(make_event(EnvId::pacman, "rob bank"), ConfigError);
    CHECK_THROWS_AS(make_event(EnvId::pacman, ""), ConfigError);
    CHECK(pac("move") != ev(EnvId::dungeon_crawler, "move"));
}

TEST_CASE("events_of projects steps in order") {
    const auto t = trajectory(EnvId::pacman, {"move", "collect dot", "move"});
    CHECK(events_of(t) == events(EnvId::pacman, {"move", "collect dot", "move"}));
    CHECK(events_of(Trajectory{}).empty());

    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        const auto seq = random_sequence(rng, EnvId::bank_heist, 20, 5);
        CHECK(events_of(trajectory(EnvId::bank_heist, seq)).size() == seq.size());
    }
}

TEST_CASE("is_subtrajectory follows order-preserving deletion") {
    const auto abc = events(EnvId::pacman, {"move", "collect dot", "kill a ghost"});
    const auto a = abc[0], b = abc[1], c = abc[2];
    CHECK(is_subtrajectory(std::vector{a, c}, abc));
    CHECK(is_subtrajectory(std::vector{a, b}, abc));
    CHECK(is_subtrajectory(std::vector{b, c}, abc));
    CHECK_FALSE(is_subtrajectory(std::vector{c, a}, abc));
    CHECK(is_subtrajectory(std::vector<Event>{}, abc));
    CHECK_FALSE(is_subtrajectory(std::vector{a, a}, abc));

    Rng rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto seq = random_sequence(rng, EnvId::pacman, 12, 4);
        CHECK(is_subtrajectory(seq, seq));
        // Any mask-selected subsequence is accepted.
        std::vector<Event> sub;
        for (const auto& e : seq) {
            if (bernoulli(rng, 0.5)) sub.push_back(e);
        }
        CHECK(is_subtrajectory(sub, seq));
    }
}

TEST_CASE("spec construction merges duplicates and validates counts") {
    const auto kill = pac("kill a ghost");
    EventOfInterestSpec s({{kill, 1}, {kill, 1}});
    REQUIRE(s.requirements().size() == 1);
    CHECK(s.requirements()[0].count == 2);
    CHECK_THROWS_AS(EventOfInterestSpec({}), ConfigError);
    CHECK_THROWS_AS(EventOfInterestSpec({{kill, 0}}), ConfigError);
    CHECK_THROWS_AS(EventOfInterestSpec({{kill, 1}, {ev(EnvId::bank_heist, "rob bank"), 1}}), ConfigError);
}

TEST_CASE("parse_spec accepts counts and conjunctions") {
    CHECK(parse_spec(EnvId::pacman, "kill a ghost x2") == EventOfInterestSpec::single(pac("kill a ghost"), 2));
    CHECK(parse_spec(EnvId::pacman, "kill a ghost ×3") == EventOfInterestSpec::single(pac("kill a ghost"), 3));
    CHECK(parse_spec(EnvId::pacman, "kill a ghost*2") == EventOfInterestSpec::single(pac("kill a ghost"), 2));
    const auto compound = parse_spec(EnvId::bank_heist, "rob bank x2 and destroy police car");
    CHECK(compound.requirements().size() == 2);
    CHECK(parse_spec(EnvId::bank_heist, "destroy police car + rob bank ×2") == compound);
    CHECK(parse_spec(EnvId::bank_heist, to_string(compound)) == compound);
    CHECK_THROWS_AS(parse_spec(EnvId::pacman, "eat cherry"), ConfigError);
    CHECK_THROWS_AS(parse_spec(EnvId::pacman, "kill a ghost x0"), ConfigError);
    CHECK_THROWS_AS(parse_spec(EnvId::pacman, ""), ConfigError);
}

TEST_CASE("satisfies returns the earliest completing index") {
    const auto kill1 = parse_spec(EnvId::pacman, "kill a ghost");
    CHECK(satisfies(events(EnvId::pacman, {"move", "collect power-up", "move", "kill a ghost", "move"}), kill1) == 3u);

    auto seq = events(EnvId::pacman, {"move", "move", "move", "kill a ghost", "move", "move", "move", "kill a ghost"});
    CHECK(satisfies(seq, parse_spec(EnvId::pacman, "kill a ghost x2")) == 7u);
    CHECK_FALSE(satisfies(events(EnvId::pacman, {"move", "collect dot"}), kill1).has_value());
    CHECK_FALSE(satisfies(std::vector<Event>{}, kill1).has_value());
}

namespace {

// Brute-force oracle: the first prefix length whose counts meet every requirement.
std::optional<std::size_t> prefix_scan(const std::vector<Event>& seq, const EventOfInterestSpec& spec) {
    for (std::size_t end = 0; end < seq.size(); ++end) {
        bool ok = true;
        for (const auto& r : spec.requirements()) {
            const auto n = std::count(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(end) + 1, r.event);
            if (n < r.count) ok = false;
        }
        if (ok) return end;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("satisfies matches a brute-force prefix scan on compound specs") {
    Rng rng(2024);
    const auto spec = parse_spec(EnvId::bank_heist, "rob bank x2 and destroy police car");
    const auto single = parse_spec(EnvId::bank_heist, "collect fuel");
    for (int k = 0; k < 500; ++k) {
        const auto seq = random_sequence(rng, EnvId::bank_heist, 15, 5);
        for (const auto* s : {&spec, &single}) {
            const auto got = satisfies(seq, *s);
            CHECK(got == prefix_scan(seq, *s));
            if (got) {
                // The final step of the truncated prefix completes a requirement.
                const Event& last = seq[*got];
                const bool completes = std::any_of(s->requirements().begin(), s->requirements().end(),
                                                   [&](const Requirement& r) { return r.event == last; });
                CHECK(completes);
            }
        }
    }
}

TEST_CASE("SpecTracker agrees with satisfies") {
    Rng rng(9);
    const auto spec = parse_spec(EnvId::pacman, "kill a ghost x2 and collect power-up");
    for (int k = 0; k < 200; ++k) {
        const auto seq = random_sequence(rng, EnvId::pacman, 12, 4);
        SpecTracker tracker(spec);
        std::optional<std::size_t> first;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (tracker.observe(seq[i]) && !first) first = i;
        }
        CHECK(first == satisfies(seq, spec));
    }
}

TEST_CASE("strategy rendering and ordering") {
    const Strategy s{events(EnvId::pacman, {"collect power-up", "kill a ghost"})};
    CHECK(to_string(s) == "{collect power-up, kill a ghost}");
    CHECK(to_string(Strategy{}) == "{}");
    const Strategy r{events(EnvId::pacman, {"kill a ghost", "collect power-up"})};
    CHECK(s != r);
    CHECK(labels(s.events) == std::vector<std::string>{"collect power-up", "kill a ghost"});
}

TEST_CASE("actions convert from indices") {
    CHECK(action_from_index(4) == Action::drop_dynamite);
    CHECK(to_string(Action::left) == "left");
    CHECK_THROWS_AS(action_from_index(5), ConfigError);
    CHECK_THROWS_AS(action_from_index(-1), ConfigError);
}
