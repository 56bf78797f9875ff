#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "random_nba.hpp"
#include "tubesynth/automaton.hpp"
#include "tubesynth/error.hpp"

using namespace tubesynth;
using namespace tubesynth::automaton;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Nba manipulator_nba() { return parse_nba(slurp(TUBESYNTH_SOURCE_DIR "/configs/manipulator_2r/automaton.json")); }

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

bool fragment_less(const RunFragment& a, const RunFragment& b) {
  if (a.prefix.size() != b.prefix.size()) return a.prefix.size() < b.prefix.size();
  if (a.cycle.size() != b.cycle.size()) return a.cycle.size() < b.cycle.size();
  return a.flattened() < b.flattened();
}

}  // namespace

TEST_CASE("parse two-state document") {
  const char* doc = R"({"states":["q0","q1"],"initial":["q0"],"accepting":["q0"],
    "propositions":["p1","p3"],
    "transitions":[{"from":"q0","label":"p3","to":"q1"},{"from":"q1","label":"p1","to":"q0"}]})";
  const Nba nba = parse_nba(doc);
  CHECK(nba.transitions().size() == 2);
  CHECK(nba.has_edge("q0", "p3", "q1"));
  CHECK(nba.is_accepting("q0"));
  CHECK(parse_nba(serialize_nba(nba)) == nba);
}

TEST_CASE("undeclared state is named") {
  const char* doc = R"({"states":["q0"],"initial":["q0"],"accepting":["q0"],"propositions":["p"],
    "transitions":[{"from":"q0","label":"p","to":"q9"}]})";
  try {
    parse_nba(doc);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("q9") != std::string::npos);
  }
}

TEST_CASE("malformed and empty-initial documents") {
  CHECK(kind_of([] { parse_nba("{\"states\": ["); }) == ErrorKind::Parse);
  CHECK(kind_of([] {
          parse_nba(R"({"states":["q0"],"initial":[],"accepting":["q0"],"propositions":["p"],"transitions":[]})");
        }) == ErrorKind::Validation);
  CHECK(kind_of([] {
          parse_nba(R"({"states":["q0"],"initial":["q0"],"accepting":["q0"],"propositions":["p"],
            "transitions":[{"from":"q0","label":"zz","to":"q0"}]})");
        }) == ErrorKind::Validation);
}

TEST_CASE("manipulator automaton fragment") {
  const Nba nba = manipulator_nba();
  const RunFragment f = find_accepting_fragment(nba, "p1");
  CHECK(f.flattened() == std::vector<StateId>{"q0", "q1", "q0", "q1", "q0", "q1"});
  validate_fragment(nba, f);

  const auto d = triplets(nba, f);
  REQUIRE(d.triplets.size() == 4);
  CHECK(d.triplets[0].key() == "q0,q1,q0");
  CHECK(d.triplets[1].key() == "q1,q0,q1");
  CHECK(d.triplets[2].key() == "q0,q1,q0");
  CHECK(d.triplets[3].key() == "q1,q0,q1");
  CHECK(d.triplets[0].label_in == "p1");
  CHECK(d.triplets[0].label_out == "p2");
  CHECK(d.triplets[0].self_labels == std::vector<Proposition>{"p3"});
  CHECK(d.next(3) == d.cycle_start);

  const Switcher s = build_switcher(nba, f);
  CHECK(s.triplet_states.size() == 2);
  CHECK(s.cyclic_order.size() == 2);
  CHECK(s.initial_states == std::vector<StateId>{"q0"});

  const auto all = enumerate_fragments(nba, 2, 2);
  CHECK_FALSE(all.empty());
  for (const auto& g : all) {
    CHECK(nba.initial().count(g.prefix.front()));
    CHECK(nba.is_accepting(g.cycle.front()));
  }
}

TEST_CASE("pure self-loop has no fragment") {
  const Nba nba({"q0"}, {"q0"}, {"q0"}, {"p"}, {{"q0", "p", "q0"}});
  CHECK(kind_of([&] { find_accepting_fragment(nba, "p"); }) == ErrorKind::NoFragment);
  CHECK(enumerate_fragments(nba, 3, 3).empty());
}

TEST_CASE("two-state cycle enumerates a single fragment at minimal bounds") {
  const Nba nba({"q0", "q1"}, {"q0"}, {"q0"}, {"a", "b"}, {{"q0", "a", "q1"}, {"q1", "b", "q0"}});
  const auto all = enumerate_fragments(nba, 2, 2);
  REQUIRE(all.size() == 1);
  CHECK(all[0].flattened() == std::vector<StateId>{"q0", "q1", "q0", "q1", "q0", "q1"});
}

TEST_CASE("triplet count is length minus two") {
  const Nba nba({"a", "b", "c"}, {"a"}, {"b"}, {"x", "y", "z"},
                {{"a", "x", "b"}, {"b", "y", "c"}, {"c", "z", "b"}});
  const RunFragment f = find_accepting_fragment(nba, "x");
  CHECK(f.prefix == std::vector<StateId>{"a"});
  CHECK(f.cycle == std::vector<StateId>{"b", "c"});
  CHECK(triplets(nba, f).triplets.size() == f.flattened().size() - 2);

  const RunFragment degenerate{{}, {"b"}, "y"};
  CHECK(kind_of([&] { triplets(nba, degenerate); }) == ErrorKind::Structural);
}

TEST_CASE("single-state prefix enters the first triplet directly") {
  const Nba nba({"a", "b", "c"}, {"a"}, {"b"}, {"x", "y", "z"},
                {{"a", "x", "b"}, {"b", "y", "c"}, {"c", "z", "b"}});
  const RunFragment f = find_accepting_fragment(nba, "x");
  const Switcher s = build_switcher(nba, f);
  const auto d = triplets(nba, f);
  const auto init = s.outgoing(0);
  REQUIRE(init.size() == 1);
  CHECK(init[0].label == "x");
  CHECK(s.triplet_states[init[0].to - s.initial_states.size()] == d.triplets[0]);
  CHECK(d.next(0) == d.cycle_start);
}

TEST_CASE("random automata agree with the enumerator") {
  std::size_t with_fragment = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const Nba nba = testing_support::random_nba(seed);
    const std::size_t n = nba.states().size();
    const auto all = enumerate_fragments(nba, n, n);
    for (const auto& p : nba.alphabet()) {
      std::vector<RunFragment> matching;
      for (const auto& g : all)
        if (g.initial_proposition == p) matching.push_back(g);
      if (matching.empty()) {
        CHECK(kind_of([&] { find_accepting_fragment(nba, p); }) == ErrorKind::NoFragment);
        continue;
      }
      ++with_fragment;
      const RunFragment f = find_accepting_fragment(nba, p);
      const auto best = *std::min_element(matching.begin(), matching.end(), fragment_less);
      CHECK(f == best);
      CHECK(std::find(all.begin(), all.end(), f) != all.end());

      const auto flat = f.flattened();
      for (std::size_t i = 0; i + 1 < flat.size(); ++i) CHECK(flat[i] != flat[i + 1]);

      const auto d = triplets(nba, f);
      REQUIRE(d.triplets.size() == flat.size() - 2);
      for (std::size_t i = 0; i + 1 < d.triplets.size(); ++i) {
        CHECK(d.triplets[i].q_prime == d.triplets[i + 1].q);
        CHECK(d.triplets[i].q_double_prime == d.triplets[i + 1].q_prime);
      }

      const Switcher s = build_switcher(nba, f);
      for (std::size_t node = s.initial_states.size(); node < s.size(); ++node)
        CHECK(s.outgoing(node).size() == 1);
      CHECK(s.cyclic_order.size() == f.cycle.size());
    }
  }
  CHECK(with_fragment > 20);
}

TEST_CASE("fragment mismatch is structural") {
  const Nba nba = manipulator_nba();
  RunFragment bogus{{"q0"}, {"q1", "q0"}, "p2"};
  CHECK(kind_of([&] { validate_fragment(nba, bogus); }) == ErrorKind::Structural);
  CHECK(kind_of([&] { build_switcher(nba, bogus); }) == ErrorKind::Structural);
}
