#include <doctest.h>

#include <cmath>
#include <random>

#include "lipschitz/errors.hpp"
#include "lipschitz/holonomy.hpp"
#include "lipschitz/metric.hpp"
#include "oracles.hpp"

using namespace lipschitz;

namespace {

FreeAutomorphism twist() { return {{parse_free_word("ab"), parse_free_word("b")},
                                   {parse_free_word("aB"), parse_free_word("b")}, "twist"}; }

FreeAutomorphism cat() { return {{parse_free_word("ab"), parse_free_word("abb")},
                                 {parse_free_word("aBa"), parse_free_word("Ab")}, "cat"}; }

// A random freely reduced word of the given length in `rank` generators.
FreeWord random_word(std::mt19937_64& rng, int rank, int length) {
  FreeWord w;
  while (static_cast<int>(w.size()) < length) {
    const int g = 1 + static_cast<int>(rng() % static_cast<unsigned>(rank));
    const Letter l = rng() % 2 ? g : -g;
    if (!w.empty() && w.back() == -l) continue;
    w.push_back(l);
  }
  return w;
}

double max_entry_gap(const Mat2& m, const Mat2& n) {
  return std::max({std::abs(m.a - n.a), std::abs(m.b - n.b), std::abs(m.c - n.c),
                   std::abs(m.d - n.d)});
}

}  // namespace

TEST_CASE("word parsing and formatting") {
  CHECK(parse_free_word("a b A B") == FreeWord{1, 2, -1, -2});
  CHECK(parse_free_word("abAB") == FreeWord{1, 2, -1, -2});
  CHECK(parse_free_word("a b^-1") == FreeWord{1, -2});
  CHECK(parse_free_word("aba⁻¹b⁻¹") == FreeWord{1, 2, -1, -2});
  CHECK(parse_free_word("1").empty());
  CHECK(parse_free_word("").empty());
  CHECK_THROWS_AS(parse_free_word("a+b"), InvalidInput);
  CHECK(format_word({1, 2, -1, -2}) == "abAB");
  CHECK(format_word({}) == "1");
  CHECK(free_reduce({1, 2, -2, -1, 3}) == FreeWord{3});
  CHECK(invert({1, -2, 3}) == FreeWord{-3, 2, -1});
}

TEST_CASE("group words are cyclically reduced") {
  CHECK(GroupWord::parse("a b B").str() == "a");
  CHECK(GroupWord::parse("A b a").str() == "b");
  CHECK(GroupWord::parse("a A").empty());
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const GroupWord w(random_word(rng, 3, 1 + static_cast<int>(rng() % 12)));
    const auto& l = w.letters();
    for (std::size_t k = 0; k + 1 < l.size(); ++k) CHECK(l[k] != -l[k + 1]);
    if (l.size() > 1) CHECK(l.front() != -l.back());
  }
}

TEST_CASE("representation validation") {
  CHECK_THROWS_AS(FuchsianRep({Mat2{2, 0, 0, 1}}), InvalidInput);
  CHECK_THROWS_AS(FuchsianRep({}), InvalidInput);
  CHECK_NOTHROW(FuchsianRep({Mat2{1, 1, 1, 2}, Mat2{1, -1, -1, 2}}, parse_free_word("ab BA")));
  CHECK_THROWS_AS(FuchsianRep({Mat2{1, 1, 1, 2}, Mat2{1, -1, -1, 2}}, parse_free_word("abAB")),
                  InvalidInput);
  CHECK_THROWS_AS(FuchsianRep({Mat2{1, 1, 1, 2}}, parse_free_word("ab")), InvalidInput);
  const auto rep = punctured_torus_fixture();
  CHECK_THROWS_AS(rep.letter(3), InvalidInput);
  CHECK_THROWS_AS(word_trace(rep, GroupWord::parse("c")), InvalidInput);
}

TEST_CASE("word traces and lengths in the punctured-torus fixture") {
  const auto rep = punctured_torus_fixture();
  CHECK(word_trace(rep, GroupWord::parse("a")) == 3.0);
  CHECK(word_trace(rep, GroupWord::parse("aba⁻¹b⁻¹")) == -2.0);
  CHECK(word_trace(rep, GroupWord{}) == 2.0);
  CHECK(geodesic_length(rep, GroupWord::parse("ab")) == doctest::Approx(1.9248473002384).epsilon(1e-12));
  CHECK_THROWS_AS(geodesic_length(rep, GroupWord::parse("aba⁻¹b⁻¹")), DegenerateStructure);
  CHECK_THROWS_AS(geodesic_length(rep, GroupWord{}), DegenerateStructure);
}

TEST_CASE("trace is a class function") {
  const auto rep = genus2_octagon_fixture();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const FreeWord w = random_word(rng, 4, 2 + static_cast<int>(rng() % 8));
    const double t = rep.evaluate(w).trace();
    FreeWord rot(w.begin() + 1, w.end());
    rot.push_back(w.front());
    CHECK(rep.evaluate(rot).trace() == doctest::Approx(t).epsilon(1e-9));
    CHECK(std::abs(rep.evaluate(invert(w)).trace()) == doctest::Approx(std::abs(t)).epsilon(1e-9));
    CHECK(word_trace(rep, GroupWord(w)) == doctest::Approx(t).epsilon(1e-9));
  }
}

TEST_CASE("automorphisms") {
  const auto s = twist();
  CHECK(apply_automorphism(s, GroupWord::parse("a")).str() == "ab");
  CHECK(apply_automorphism(s, GroupWord::parse("a b b⁻¹")).str() == "ab");
  CHECK(GroupWord::parse("a b b⁻¹").str() == "a");
  CHECK(apply_automorphism(FreeAutomorphism::identity(2), GroupWord::parse("a⁻¹ b a")).str() == "b");
  CHECK_THROWS_AS(FreeAutomorphism({parse_free_word("ab"), parse_free_word("b")},
                                   {parse_free_word("ab"), parse_free_word("b")}),
                  InvalidInput);
  const auto inv = s.inverse();
  CHECK(inv.images() == s.inverse_images());
  std::mt19937_64 rng(7);
  for (int i = 0; i < 30; ++i) {
    const FreeWord w = random_word(rng, 2, 1 + static_cast<int>(rng() % 10));
    CHECK(inv.apply(s.apply(w)) == free_reduce(w));
    CHECK(cat().inverse().apply(cat().apply(w)) == free_reduce(w));
  }
}

TEST_CASE("push-forward") {
  const auto rep = punctured_torus_fixture();
  const auto same = push_forward_rep(rep, FreeAutomorphism::identity(2));
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(max_entry_gap(same.generators()[i], rep.generators()[i]) == 0.0);
  }

  const auto pushed = push_forward_rep(rep, twist());
  const auto y = act_on_point(MCGMatrix(1, 1, 0, 1), MarkovPoint::from_traces(3, 3, 3));
  CHECK(geodesic_length(pushed, GroupWord::parse("a")) == doctest::Approx(length_of_slope(y, Slope(0, 1))).epsilon(1e-9));
  CHECK(geodesic_length(pushed, GroupWord::parse("b")) == doctest::Approx(length_of_slope(y, Slope(1, 0))).epsilon(1e-9));
  CHECK(geodesic_length(pushed, GroupWord::parse("ab")) == doctest::Approx(length_of_slope(y, Slope(1, 1))).epsilon(1e-9));

  const auto back = push_forward_rep(pushed, twist().inverse());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(max_entry_gap(back.generators()[i], rep.generators()[i]) <= 1e-9);
  }
  CHECK_THROWS_AS(push_forward_rep(genus2_octagon_fixture(), twist()), InvalidInput);
}

TEST_CASE("push-forward preserves the octagon relator") {
  const auto rep = genus2_octagon_fixture();
  CHECK(rep.relator_residual() <= 1e-12);
  const auto fx = load_fixture(LIPSCHITZ_DATA_DIR "/fixtures/genus2_octagon.json");
  REQUIRE(fx.automorphisms.size() == 1);
  const auto pushed = push_forward_rep(rep, fx.automorphisms.front());
  CHECK(pushed.relator_residual() <= 1e-9);
  // the rotation is an isometry of the regular octagon
  CHECK(dl_lower_bound(rep, pushed, 4).value == doctest::Approx(0.0).epsilon(1e-9));
  // an automorphism that does not preserve the relator is rejected
  const FreeAutomorphism bad({parse_free_word("ab"), parse_free_word("b"), parse_free_word("c"),
                              parse_free_word("d")},
                             {parse_free_word("aB"), parse_free_word("b"), parse_free_word("c"),
                              parse_free_word("d")});
  CHECK_THROWS_AS(push_forward_rep(rep, bad), PreconditionViolation);
}

TEST_CASE("relabeling identity on random words") {
  const auto rep = genus2_octagon_fixture();
  const auto rot = load_fixture(LIPSCHITZ_DATA_DIR "/fixtures/genus2_octagon.json").automorphisms.front();
  const auto torus = punctured_torus_fixture();
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 50) {
    const bool genus2 = checked % 2 == 0;
    const auto& base = genus2 ? rep : torus;
    const FreeAutomorphism sigma = genus2 ? rot : cat();
    const GroupWord w(random_word(rng, static_cast<int>(base.rank()), 2 + static_cast<int>(rng() % 6)));
    const GroupWord pre = apply_automorphism(sigma.inverse(), w);
    if (std::abs(word_trace(base, pre)) <= 2.0 + 1e-9) continue;
    const double lhs = geodesic_length(push_forward_rep(base, sigma), w);
    const double rhs = geodesic_length(base, pre);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs));
    ++checked;
  }
}

TEST_CASE("slope words realize the trace recursion") {
  CHECK(slope_word(Slope(0, 1)).str() == "a");
  CHECK(slope_word(Slope(1, 0)).str() == "b");
  CHECK(slope_word(Slope(1, 1)).size() == 2);
  CHECK(slope_word(Slope(-2, 3)).size() == 5);
  std::mt19937_64 rng(13);
  for (const auto& x : {MarkovPoint::from_traces(3, 3, 3), MarkovPoint::from_traces(20.1, 2.01, 20.1),
                        oracle::random_point(rng), oracle::random_point(rng)}) {
    const auto rep = punctured_torus_rep(x);
    CHECK(rep.relator_residual() == 0.0);
    CHECK(word_trace(rep, GroupWord::parse("abAB")) == doctest::Approx(-2.0).epsilon(1e-9));
    for (const Slope& s : enumerate_slopes(12)) {
      CHECK(geodesic_length(rep, slope_word(s)) ==
            doctest::Approx(length_of_slope(x, s)).epsilon(1e-9));
    }
  }
}

TEST_CASE("holonomy distance bound") {
  const auto rep = punctured_torus_fixture();
  CHECK(dl_lower_bound(rep, rep, 6).value == 0.0);
  const auto pushed = push_forward_rep(rep, twist());
  const auto r4 = dl_lower_bound(rep, pushed, 4);
  const auto r8 = dl_lower_bound(rep, pushed, 8);
  CHECK(r8.value >= r4.value);
  CHECK(r8.classes > r4.classes);
  CHECK(r8.max_word_length == 8);
  CHECK(r8.value == doctest::Approx(std::log(std::acosh(3.0) / std::acosh(1.5))).epsilon(1e-12));
  CHECK(r8.argmax_word.str() == "a");
  CHECK_THROWS_AS(dl_lower_bound(rep, genus2_octagon_fixture(), 4), InvalidInput);
  CHECK_THROWS_AS(dl_lower_bound(rep, rep, 0), InvalidInput);
}

TEST_CASE("holonomy bound counts classes up to rotation and inversion") {
  // necklaces in {a, A, b, B} without cancellation, up to rotation and
  // reversal-inversion, and not proper powers: 2 + 2 classes of length 1
  const auto rep = punctured_torus_fixture();
  CHECK(dl_lower_bound(rep, rep, 1).classes == 2);
}

TEST_CASE("holonomy bound stays below the converged curve estimate") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 6; ++i) {
    const auto x = oracle::random_point(rng, 1), y = oracle::random_point(rng, 1);
    const double curves = dl_estimate(x, y, 200).value;
    const double words = dl_lower_bound(punctured_torus_rep(x), punctured_torus_rep(y), 8).value;
    CHECK(words <= curves + 1e-6);
  }
}

TEST_CASE("fixture files") {
  const auto torus = load_fixture(LIPSCHITZ_DATA_DIR "/fixtures/punctured_torus.json");
  CHECK(torus.rep.rank() == 2);
  CHECK(torus.automorphisms.size() == 3);
  CHECK(torus.automorphisms.front().name() == "twist");
  const auto again = parse_fixture(fixture_to_json(torus));
  CHECK(again.rep.label() == torus.rep.label());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(max_entry_gap(again.rep.generators()[i], torus.rep.generators()[i]) == 0.0);
  }
  const auto octagon = load_fixture(LIPSCHITZ_DATA_DIR "/fixtures/genus2_octagon.json");
  CHECK(octagon.rep.rank() == 4);
  CHECK(octagon.rep.relator().has_value());
  CHECK_THROWS_AS(load_fixture("/nonexistent/fixture.json"), InvalidInput);
}

TEST_CASE("fixture errors are reported together") {
  const char* text = R"({"label": "broken",
    "generators": [[2, 0, 0, 1], [1, 1, 1]],
    "automorphisms": [{"name": "nope", "images": ["ab", "b"], "inverse_images": ["ab", "b"]}]})";
  try {
    parse_fixture(text);
    FAIL("expected a rejection");
  } catch (const InvalidInput& e) {
    const std::string msg = e.what();
    CHECK(msg.find("generators[0]: determinant") != std::string::npos);
    CHECK(msg.find("generators[1]") != std::string::npos);
    CHECK(msg.find("nope") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_fixture("{not json"), InvalidInput);
  CHECK_THROWS_AS(parse_fixture("[]"), InvalidInput);
}
