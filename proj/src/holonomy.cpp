#include "lipschitz/holonomy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "lipschitz/errors.hpp"

namespace lipschitz {

namespace {

constexpr int kMaxGenerators = 26;

// Shortlex codes: a < A < b < B < ...
Letter code_letter(int code) { return (code % 2 == 0 ? 1 : -1) * (code / 2 + 1); }

double max_dist_from_pm_identity(const Mat2& m) {
  auto dist = [&](double s) {
    return std::max({std::abs(m.a - s), std::abs(m.b), std::abs(m.c), std::abs(m.d - s)});
  };
  return std::min(dist(1.0), dist(-1.0));
}

}  // namespace

FreeWord parse_free_word(std::string_view text) {
  FreeWord out;
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char ch = static_cast<unsigned char>(text[i]);
    if (std::isspace(ch) || ch == '*' || ch == '.' || ch == '1') {
      ++i;
      continue;
    }
    if (!std::isalpha(ch)) {
      throw InvalidInput("unexpected character '" + std::string(1, text[i]) + "' in word '" +
                         std::string(text) + "'");
    }
    Letter l = std::tolower(ch) - 'a' + 1;
    if (std::isupper(ch)) l = -l;
    ++i;
    // Optional explicit inverse: a^-1 or the superscript form.
    if (text.substr(i, 3) == "^-1") {
      l = -l;
      i += 3;
    } else if (text.substr(i, 5) == "⁻¹") {
      l = -l;
      i += 5;
    }
    out.push_back(l);
  }
  return free_reduce(out);
}

std::string format_word(const FreeWord& w) {
  if (w.empty()) return "1";
  std::string out;
  for (Letter l : w) {
    const char base = static_cast<char>('a' + std::abs(l) - 1);
    out.push_back(l > 0 ? base : static_cast<char>(std::toupper(base)));
  }
  return out;
}

FreeWord free_reduce(const FreeWord& w) {
  FreeWord out;
  for (Letter l : w) {
    if (l == 0) throw InvalidInput("letter 0 is not a generator");
    if (!out.empty() && out.back() == -l) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

FreeWord invert(const FreeWord& w) {
  FreeWord out(w.rbegin(), w.rend());
  for (Letter& l : out) l = -l;
  return out;
}

GroupWord::GroupWord(const FreeWord& w) {
  FreeWord r = free_reduce(w);
  std::size_t lo = 0, hi = r.size();
  while (hi - lo >= 2 && r[lo] == -r[hi - 1]) {
    ++lo;
    --hi;
  }
  letters_.assign(r.begin() + static_cast<std::ptrdiff_t>(lo),
                  r.begin() + static_cast<std::ptrdiff_t>(hi));
}

FuchsianRep::FuchsianRep(std::vector<Mat2> generators, std::optional<FreeWord> relator,
                         std::string label)
    : gens_(std::move(generators)), relator_(std::move(relator)), label_(std::move(label)) {
  if (gens_.empty()) throw InvalidInput("representation needs at least one generator");
  if (gens_.size() > kMaxGenerators) throw InvalidInput("at most 26 generators are supported");
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    const Mat2& g = gens_[i];
    if (!std::isfinite(g.a) || !std::isfinite(g.b) || !std::isfinite(g.c) ||
        !std::isfinite(g.d)) {
      problems.push_back("generator " + format_word({static_cast<Letter>(i + 1)}) +
                         " has a non-finite entry");
      continue;
    }
    if (std::abs(g.det() - 1.0) > kDetTolerance) {
      std::ostringstream os;
      os << "generator " << format_word({static_cast<Letter>(i + 1)}) << " has determinant "
         << g.det() << ", expected 1";
      problems.push_back(os.str());
    }
  }
  if (!problems.empty()) {
    std::string msg = problems.front();
    for (std::size_t i = 1; i < problems.size(); ++i) msg += "; " + problems[i];
    throw InvalidInput(msg);
  }
  inverses_.reserve(gens_.size());
  for (const Mat2& g : gens_) inverses_.push_back(g.inverse());
  if (relator_) {
    for (Letter l : *relator_) {
      if (static_cast<std::size_t>(std::abs(l)) > gens_.size()) {
        throw InvalidInput("relator uses a generator the representation does not have");
      }
    }
    const double res = relator_residual();
    if (!(res <= kRelatorTolerance)) {
      std::ostringstream os;
      os << "relator " << format_word(*relator_) << " evaluates " << res
         << " away from +-identity";
      throw InvalidInput(os.str());
    }
  }
}

const Mat2& FuchsianRep::letter(Letter l) const {
  const auto idx = static_cast<std::size_t>(std::abs(l));
  if (l == 0 || idx > gens_.size()) {
    throw InvalidInput("generator index " + std::to_string(l) + " out of range");
  }
  return l > 0 ? gens_[idx - 1] : inverses_[idx - 1];
}

Mat2 FuchsianRep::evaluate(const FreeWord& w) const {
  Mat2 m;
  for (Letter l : w) m = m * letter(l);
  return m;
}

double FuchsianRep::relator_residual() const {
  if (!relator_) return 0.0;
  return max_dist_from_pm_identity(evaluate(*relator_));
}

double word_trace(const FuchsianRep& rep, const GroupWord& w) {
  return rep.evaluate(w.letters()).trace();
}

double geodesic_length(const FuchsianRep& rep, const GroupWord& w) {
  const double t = std::abs(word_trace(rep, w));
  if (!(t > 2.0)) {
    std::ostringstream os;
    os << "word " << w.str() << " has |trace| " << t
       << " <= 2: elliptic, parabolic or trivial, no closed geodesic";
    throw DegenerateStructure(os.str());
  }
  return length_from_trace(t);
}

FreeAutomorphism::FreeAutomorphism(std::vector<FreeWord> images,
                                   std::vector<FreeWord> inverse_images, std::string name)
    : images_(std::move(images)), inverse_images_(std::move(inverse_images)),
      name_(std::move(name)) {
  if (images_.empty()) throw InvalidInput("automorphism needs at least one generator image");
  if (images_.size() != inverse_images_.size()) {
    throw InvalidInput("automorphism '" + name_ + "' has " + std::to_string(images_.size()) +
                       " images but " + std::to_string(inverse_images_.size()) +
                       " inverse images");
  }
  const auto rank = static_cast<Letter>(images_.size());
  for (auto* list : {&images_, &inverse_images_}) {
    for (FreeWord& w : *list) {
      w = free_reduce(w);
      for (Letter l : w) {
        if (std::abs(l) > rank) {
          throw InvalidInput("automorphism '" + name_ + "' uses a generator beyond its rank");
        }
      }
    }
  }
  const FreeAutomorphism inv = inverse();
  for (Letter g = 1; g <= rank; ++g) {
    if (inv.apply(apply({g})) != FreeWord{g} || apply(inv.apply({g})) != FreeWord{g}) {
      throw InvalidInput("automorphism '" + name_ + "': declared inverse does not undo it on " +
                         format_word({g}));
    }
  }
}

FreeAutomorphism FreeAutomorphism::identity(std::size_t rank) {
  std::vector<FreeWord> gens;
  for (std::size_t i = 0; i < rank; ++i) gens.push_back({static_cast<Letter>(i + 1)});
  return FreeAutomorphism(gens, gens, "identity");
}

FreeAutomorphism FreeAutomorphism::inverse() const {
  // Private copy without re-verification.
  FreeAutomorphism out = *this;
  std::swap(out.images_, out.inverse_images_);
  out.name_ = name_.empty() ? std::string{} : name_ + "^-1";
  return out;
}

FreeWord FreeAutomorphism::apply(const FreeWord& w) const {
  FreeWord out;
  for (Letter l : w) {
    const auto idx = static_cast<std::size_t>(std::abs(l));
    if (l == 0 || idx > images_.size()) {
      throw InvalidInput("word uses a generator beyond the automorphism's rank");
    }
    const FreeWord& img = images_[idx - 1];
    if (l > 0) {
      out.insert(out.end(), img.begin(), img.end());
    } else {
      const FreeWord inv = invert(img);
      out.insert(out.end(), inv.begin(), inv.end());
    }
  }
  return free_reduce(out);
}

GroupWord apply_automorphism(const FreeAutomorphism& sigma, const GroupWord& w) {
  return GroupWord(sigma.apply(w.letters()));
}

FuchsianRep push_forward_rep(const FuchsianRep& rep, const FreeAutomorphism& sigma) {
  if (sigma.rank() != rep.rank()) {
    throw InvalidInput("automorphism rank " + std::to_string(sigma.rank()) +
                       " does not match representation rank " + std::to_string(rep.rank()));
  }
  std::vector<Mat2> gens;
  gens.reserve(rep.rank());
  for (const FreeWord& img : sigma.inverse_images()) gens.push_back(rep.evaluate(img));
  try {
    return FuchsianRep(std::move(gens), rep.relator(), rep.label());
  } catch (const InvalidInput& e) {
    throw PreconditionViolation("push-forward breaks the representation: " +
                                std::string(e.what()));
  }
}

HoloDLReport dl_lower_bound(const FuchsianRep& rep1, const FuchsianRep& rep2,
                            int max_word_length) {
  if (rep1.rank() != rep2.rank()) {
    throw InvalidInput("representations have different generator counts");
  }
  if (max_word_length < 1) throw InvalidInput("max word length must be at least 1");
  const int n_codes = static_cast<int>(2 * rep1.rank());

  HoloDLReport report;
  report.max_word_length = max_word_length;
  report.value = -std::numeric_limits<double>::infinity();
  bool have = false;

  std::vector<int> codes;
  std::vector<Mat2> prefix1{Mat2{}}, prefix2{Mat2{}};

  // One representative per class: the smallest code sequence among all
  // rotations of w and of its inverse.  Proper powers repeat the ratio of
  // their root and are skipped.
  std::vector<int> inv_codes, rotated;
  auto is_canonical_primitive = [&]() {
    const std::size_t k = codes.size();
    inv_codes.resize(k);
    for (std::size_t i = 0; i < k; ++i) inv_codes[i] = codes[k - 1 - i] ^ 1;
    for (std::size_t r = 0; r < k; ++r) {
      for (const std::vector<int>* src : {&codes, &inv_codes}) {
        if (r == 0 && src == &codes) continue;
        int cmp = 0;
        for (std::size_t i = 0; i < k && cmp == 0; ++i) {
          const int c = (*src)[(i + r) % k];
          cmp = (c > codes[i]) - (c < codes[i]);
        }
        if (cmp < 0) return false;
        if (cmp == 0 && src == &codes) return false;  // proper power
      }
    }
    return true;
  };

  auto consider = [&]() {
    const std::size_t k = codes.size();
    if (k == 0) return;
    if ((codes.front() ^ 1) == codes.back() && k > 1) return;  // not cyclically reduced
    if (!is_canonical_primitive()) return;
    const double t1 = std::abs(prefix1.back().trace());
    const double t2 = std::abs(prefix2.back().trace());
    if (!(t1 > 2.0) || !(t2 > 2.0)) return;
    ++report.classes;
    const double r = std::log(length_from_trace(t2) / length_from_trace(t1));
    if (!have || r > report.value) {
      FreeWord w;
      for (int c : codes) w.push_back(code_letter(c));
      report.value = r;
      report.argmax_word = GroupWord(w);
      have = true;
    }
  };

  // Depth-first over freely reduced words, prefixes multiplied incrementally.
  std::vector<int> next_code{0};
  while (!next_code.empty()) {
    int& c = next_code.back();
    if (c >= n_codes) {
      next_code.pop_back();
      if (!codes.empty()) {
        codes.pop_back();
        prefix1.pop_back();
        prefix2.pop_back();
      }
      continue;
    }
    const int code = c++;
    if (!codes.empty() && (codes.back() ^ 1) == code) continue;
    codes.push_back(code);
    prefix1.push_back(prefix1.back() * rep1.letter(code_letter(code)));
    prefix2.push_back(prefix2.back() * rep2.letter(code_letter(code)));
    consider();
    if (static_cast<int>(codes.size()) < max_word_length) {
      next_code.push_back(0);
    } else {
      codes.pop_back();
      prefix1.pop_back();
      prefix2.pop_back();
    }
  }
  if (!have) report.value = 0.0;
  return report;
}

GroupWord slope_word(const Slope& s) {
  const Vec2 target = s.vec();
  if (target.q == 0) return GroupWord(FreeWord{2});
  if (target.p == 0) return GroupWord(FreeWord{1});
  Vec2 u{0, 1}, v{target.p > 0 ? 1 : -1, 0};
  FreeWord wu{1}, wv{target.p > 0 ? 2 : -2};
  auto det = [](const Vec2& x, const Vec2& y) { return x.p * y.q - x.q * y.p; };
  auto sign = [](Int x) { return (x > 0) - (x < 0); };
  for (;;) {
    const Vec2 m{u.p + v.p, u.q + v.q};
    FreeWord wm = wu;
    wm.insert(wm.end(), wv.begin(), wv.end());
    if (m == target) return GroupWord(wm);
    if (sign(det(m, target)) == sign(det(m, u))) {
      v = m;
      wv = std::move(wm);
    } else {
      u = m;
      wu = std::move(wm);
    }
  }
}

FuchsianRep punctured_torus_fixture() {
  return FuchsianRep({{1, 1, 1, 2}, {1, -1, -1, 2}}, std::nullopt, "punctured torus (3,3,3)");
}

FuchsianRep punctured_torus_rep(const MarkovPoint& x) {
  // A = [[x, 1], [-1, 0]], B = [[0, s], [-1/s, y]] with s + 1/s = -z; the
  // small root is taken in the form that avoids cancellation.
  const double s = -2.0 / (x.z() + std::sqrt((x.z() - 2.0) * (x.z() + 2.0)));
  std::ostringstream label;
  label.precision(17);
  label << "punctured torus (" << x.x() << "," << x.y() << "," << x.z() << ")";
  return FuchsianRep({{x.x(), 1.0, -1.0, 0.0}, {0.0, s, -1.0 / s, x.y()}}, std::nullopt,
                     label.str());
}

FuchsianRep genus2_octagon_fixture() {
  // Opposite sides of the regular octagon with angles pi/4 sit at distance
  // d from the centre with cosh d = cot(pi/8) = 1 + sqrt 2.  The pairing of
  // side k + 4 with side k translates by 2d along the k-th axis; written in
  // SU(1,1) and moved to SL(2,R) by the Cayley transform.
  const double ch = 1.0 + std::sqrt(2.0);
  const double sh = std::sqrt(2.0 * ch);
  std::vector<Mat2> gens;
  for (int k = 0; k < 4; ++k) {
    const double theta = k * std::numbers::pi / 4.0;
    // R g0 R^-1 with R = diag(e^{i theta/2}, e^{-i theta/2}): alpha = ch, beta = sh e^{i theta}.
    const double alpha_re = ch, alpha_im = 0.0;
    const double beta_re = sh * std::cos(theta), beta_im = sh * std::sin(theta);
    gens.push_back({alpha_re + beta_im, alpha_im + beta_re, beta_re - alpha_im,
                    alpha_re - beta_im});
  }
  return FuchsianRep(std::move(gens), parse_free_word("a B c D A b C d"),
                     "genus 2 regular octagon");
}

namespace {

using nlohmann::json;

std::vector<FreeWord> parse_word_list(const json& j, const std::string& where,
                                      std::vector<std::string>& problems) {
  std::vector<FreeWord> out;
  if (!j.is_array()) {
    problems.push_back(where + ": expected a list of words");
    return out;
  }
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_string()) {
      problems.push_back(where + "[" + std::to_string(i) + "]: expected a word string");
      continue;
    }
    try {
      out.push_back(parse_free_word(j[i].get<std::string>()));
    } catch (const InvalidInput& e) {
      problems.push_back(where + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

}  // namespace

Fixture parse_fixture(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("fixture is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("fixture must be a JSON object");
  std::vector<std::string> problems;
  const std::string label = j.value("label", std::string{});

  std::vector<Mat2> gens;
  if (!j.contains("generators") || !j["generators"].is_array()) {
    problems.push_back("generators: missing or not a list");
  } else {
    for (std::size_t i = 0; i < j["generators"].size(); ++i) {
      const json& g = j["generators"][i];
      if (!g.is_array() || g.size() != 4 ||
          !std::all_of(g.begin(), g.end(), [](const json& e) { return e.is_number(); })) {
        problems.push_back("generators[" + std::to_string(i) + "]: expected 4 numbers");
        continue;
      }
      const Mat2 m{g[0].get<double>(), g[1].get<double>(), g[2].get<double>(),
                   g[3].get<double>()};
      if (!(std::abs(m.det() - 1.0) <= FuchsianRep::kDetTolerance)) {
        problems.push_back("generators[" + std::to_string(i) + "]: determinant " +
                           std::to_string(m.det()) + " is not 1");
      }
      gens.push_back(m);
    }
  }
  std::optional<FreeWord> relator;
  if (j.contains("relator") && !j["relator"].is_null()) {
    if (!j["relator"].is_string()) {
      problems.push_back("relator: expected a word string");
    } else {
      try {
        relator = parse_free_word(j["relator"].get<std::string>());
      } catch (const InvalidInput& e) {
        problems.push_back(std::string("relator: ") + e.what());
      }
    }
  }

  std::optional<FuchsianRep> rep;
  if (problems.empty()) {
    try {
      rep.emplace(gens, relator, label);
    } catch (const InvalidInput& e) {
      problems.push_back(std::string("generators: ") + e.what());
    }
  }

  std::vector<FreeAutomorphism> autos;
  if (j.contains("automorphisms")) {
    if (!j["automorphisms"].is_array()) {
      problems.push_back("automorphisms: expected a list");
    } else {
      for (std::size_t i = 0; i < j["automorphisms"].size(); ++i) {
        const json& a = j["automorphisms"][i];
        const std::string where = "automorphisms[" + std::to_string(i) + "]";
        if (!a.is_object()) {
          problems.push_back(where + ": expected an object");
          continue;
        }
        const std::string name = a.value("name", where);
        const std::size_t before = problems.size();
        auto images = parse_word_list(a.value("images", json()), name + ".images", problems);
        auto inverses =
            parse_word_list(a.value("inverse_images", json()), name + ".inverse_images", problems);
        if (problems.size() != before) continue;
        try {
          FreeAutomorphism sigma(images, inverses, name);
          if (rep && sigma.rank() != rep->rank()) {
            problems.push_back(name + ": rank " + std::to_string(sigma.rank()) +
                               " does not match the generators");
            continue;
          }
          autos.push_back(std::move(sigma));
        } catch (const InvalidInput& e) {
          problems.push_back(e.what());
        }
      }
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid fixture";
    if (!label.empty()) msg += " '" + label + "'";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw InvalidInput(msg);
  }
  return Fixture{std::move(*rep), std::move(autos)};
}

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read fixture file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_fixture(buf.str());
}

std::string fixture_to_json(const Fixture& f) {
  json j;
  j["label"] = f.rep.label();
  j["generators"] = json::array();
  for (const Mat2& g : f.rep.generators()) j["generators"].push_back({g.a, g.b, g.c, g.d});
  if (f.rep.relator()) j["relator"] = format_word(*f.rep.relator());
  j["automorphisms"] = json::array();
  for (const FreeAutomorphism& a : f.automorphisms) {
    json entry;
    entry["name"] = a.name();
    entry["images"] = json::array();
    entry["inverse_images"] = json::array();
    for (const FreeWord& w : a.images()) entry["images"].push_back(format_word(w));
    for (const FreeWord& w : a.inverse_images()) entry["inverse_images"].push_back(format_word(w));
    j["automorphisms"].push_back(entry);
  }
  return j.dump(2);
}

}  // namespace lipschitz
