#pragma once

// Command-line front end: scene files, flag parsing, dispatch and JSON/CSV
// reports.  Exit codes: 0 success (numeric non-convergence is reported in
// the JSON), 2 malformed input, 3 violated precondition, 1 internal fault.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipschitz/curves.hpp"
#include "lipschitz/holonomy.hpp"
#include "lipschitz/torus_teich.hpp"

namespace lipschitz {

inline constexpr const char* kReportSchema = "lipschitz.report/1";
const char* version_string();

enum ExitCode : int {
  kExitOk = 0,
  kExitFault = 1,
  kExitMalformed = 2,
  kExitPrecondition = 3,
};

struct Scene {
  std::map<std::string, MarkovPoint> points;
  std::map<std::string, MCGMatrix> matrices;
  std::map<std::string, Fixture> reps;
  AnalysisConfig config;
};

// Every validation failure in a scene, each naming its entry.
class SceneError : public std::invalid_argument {
 public:
  explicit SceneError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Scene JSON:
//   {"points": {"X": {"x": 3, "y": 3, "z": 3}},
//    "matrices": {"phi": [2, 1, 1, 1]},
//    "reps": {"torus": "fixtures/punctured_torus.json" or an inline fixture},
//    "config": {"delta0": .., "slope_budget": .., "tolerance": .., "thin_epsilon": ..}}
// Relative fixture paths resolve against base_dir.
Scene parse_scene(std::string_view json_text, const std::string& base_dir = ".");
Scene load_scene(const std::string& path);

MarkovPoint point_from_json(const nlohmann::json& j);  // {"x","y","z"}; throws InvalidInput
nlohmann::json point_to_json(const MarkovPoint& x);
nlohmann::json config_to_json(const AnalysisConfig& cfg);

// Rounds to 9 significant digits so regression diffs are stable.
double round9(double v);

struct RunRecord {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

// argv excludes the program name.  The report goes to `out` unless --out
// is given; diagnostics go to `err`.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err,
                RunRecord* record = nullptr);

}  // namespace lipschitz
