#pragma once

// Length spectra of Fuchsian representations given by generator matrices.
// Closed curves are conjugacy classes of words; generator i is the letter
// 'a' + i and its inverse the matching capital.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lipschitz/curves.hpp"
#include "lipschitz/torus_teich.hpp"

namespace lipschitz {

// Real 2x2 matrix, row-major.
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double trace() const { return a + d; }
  double det() const { return a * d - b * c; }
  Mat2 inverse() const { return {d, -b, -c, a}; }  // det 1 assumed
  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d, m.c * n.a + m.d * n.c,
            m.c * n.b + m.d * n.d};
  }
};

// Letters are signed generator numbers: +(i+1) for generator i, -(i+1) for
// its inverse.
using Letter = int;
using FreeWord = std::vector<Letter>;

FreeWord parse_free_word(std::string_view text);  // "a b A B", "abAB", "ab a^-1"
std::string format_word(const FreeWord& w);       // "abAB"; the empty word prints as "1"
FreeWord free_reduce(const FreeWord& w);
FreeWord invert(const FreeWord& w);

// A conjugacy class of the free group, stored cyclically reduced.
class GroupWord {
 public:
  GroupWord() = default;
  explicit GroupWord(const FreeWord& w);
  static GroupWord parse(std::string_view text) { return GroupWord(parse_free_word(text)); }

  const FreeWord& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  std::string str() const { return format_word(letters_); }
  GroupWord inverse() const { return GroupWord(invert(letters_)); }

  friend bool operator==(const GroupWord&, const GroupWord&) = default;

 private:
  FreeWord letters_;
};

class FuchsianRep {
 public:
  static constexpr double kDetTolerance = 1e-9;
  static constexpr double kRelatorTolerance = 1e-6;

  // Throws InvalidInput if a determinant is off or the relator's product is
  // not +-identity.
  FuchsianRep(std::vector<Mat2> generators, std::optional<FreeWord> relator = std::nullopt,
              std::string label = {});

  const std::vector<Mat2>& generators() const { return gens_; }
  const std::optional<FreeWord>& relator() const { return relator_; }
  const std::string& label() const { return label_; }
  std::size_t rank() const { return gens_.size(); }

  // Matrix of a letter or a word; throws InvalidInput for unknown generators.
  const Mat2& letter(Letter l) const;
  Mat2 evaluate(const FreeWord& w) const;
  // max entry distance of the relator product from +-identity; 0 without relator
  double relator_residual() const;

 private:
  std::vector<Mat2> gens_;
  std::vector<Mat2> inverses_;
  std::optional<FreeWord> relator_;
  std::string label_;
};

double word_trace(const FuchsianRep& rep, const GroupWord& w);
// 2 arccosh(|tr| / 2); throws DegenerateStructure when |tr| <= 2.
double geodesic_length(const FuchsianRep& rep, const GroupWord& w);

class FreeAutomorphism {
 public:
  // images[i] is the image of generator i; inverse_images[i] its image under
  // the declared inverse.  Throws InvalidInput unless both composites fix
  // every generator.
  FreeAutomorphism(std::vector<FreeWord> images, std::vector<FreeWord> inverse_images,
                   std::string name = {});
  static FreeAutomorphism identity(std::size_t rank);

  std::size_t rank() const { return images_.size(); }
  const std::vector<FreeWord>& images() const { return images_; }
  const std::vector<FreeWord>& inverse_images() const { return inverse_images_; }
  const std::string& name() const { return name_; }
  FreeAutomorphism inverse() const;

  FreeWord apply(const FreeWord& w) const;  // freely reduced image

 private:
  std::vector<FreeWord> images_;
  std::vector<FreeWord> inverse_images_;
  std::string name_;
};

GroupWord apply_automorphism(const FreeAutomorphism& sigma, const GroupWord& w);

// Generators g_i' = rep(sigma^{-1}(g_i)), so that the length of w in the new
// representation is the length of sigma^{-1}(w) in the old one.  Throws
// PreconditionViolation if the relator residual is not preserved.
FuchsianRep push_forward_rep(const FuchsianRep& rep, const FreeAutomorphism& sigma);

struct HoloDLReport {
  double value = 0.0;
  GroupWord argmax_word;
  int max_word_length = 0;
  std::size_t classes = 0;  // conjugacy classes (up to inversion) compared
};

// max log(l_2(w) / l_1(w)) over cyclically reduced words of length <= cap
// that are hyperbolic in both representations, one word per class up to
// rotation and inversion.  Ties go to the first class in shortlex order.
HoloDLReport dl_lower_bound(const FuchsianRep& rep1, const FuchsianRep& rep2,
                            int max_word_length);

// Christoffel word of a slope in the punctured-torus generators: q letters
// a and |p| letters b (B when p < 0).
GroupWord slope_word(const Slope& s);

// A = [[1,1],[1,2]], B = [[1,-1],[-1,2]]: the point (3,3,3).
FuchsianRep punctured_torus_fixture();
// A representation realizing the trace triple of x, with a -> 0/1, b -> 1/0.
FuchsianRep punctured_torus_rep(const MarkovPoint& x);
// Regular octagon group with interior angles pi/4, opposite
// sides paired, relator a B c D A b C d.
FuchsianRep genus2_octagon_fixture();

struct Fixture {
  FuchsianRep rep;
  std::vector<FreeAutomorphism> automorphisms;
};

// JSON format: {"label", "generators": [[a,b,c,d], ...], "relator": "a b A B",
// "automorphisms": [{"name", "images": [...], "inverse_images": [...]}]}.
// Throws InvalidInput with every problem found.
Fixture load_fixture(const std::string& path);
Fixture parse_fixture(std::string_view json_text);
std::string fixture_to_json(const Fixture& f);

}  // namespace lipschitz
