// Writes the bundled fixture files from the library's own constructions.
#include <fstream>
#include <iostream>

#include "lipschitz/holonomy.hpp"

using namespace lipschitz;

namespace {

void write(const std::string& path, const Fixture& f) {
  std::ofstream out(path);
  out << fixture_to_json(f) << "\n";
  std::cout << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data/fixtures";
  auto w = [](const char* s) { return parse_free_word(s); };

  Fixture torus{punctured_torus_fixture(), {}};
  torus.automorphisms.emplace_back(std::vector{w("ab"), w("b")}, std::vector{w("aB"), w("b")},
                                   "twist");
  torus.automorphisms.emplace_back(std::vector{w("ab"), w("abb")},
                                   std::vector{w("aBa"), w("Ab")}, "cat");
  torus.automorphisms.emplace_back(std::vector{w("b"), w("A")}, std::vector{w("B"), w("a")},
                                   "quarter_turn");
  write(dir + "/punctured_torus.json", torus);

  Fixture octagon{genus2_octagon_fixture(), {}};
  octagon.automorphisms.emplace_back(std::vector{w("b"), w("c"), w("d"), w("A")},
                                     std::vector{w("D"), w("a"), w("b"), w("c")}, "rotation");
  write(dir + "/genus2_octagon.json", octagon);
  return 0;
}
