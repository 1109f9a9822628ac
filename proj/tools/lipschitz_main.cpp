#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "lipschitz/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  // --record PATH is handled here so the report itself never carries timing.
  std::string record_path;
  for (auto it = args.begin(); it != args.end(); ++it) {
    if (*it == "--record" && it + 1 != args.end()) {
      record_path = *(it + 1);
      args.erase(it, it + 2);
      break;
    }
  }
  lipschitz::RunRecord record;
  const int code = lipschitz::run_command(args, std::cout, std::cerr, &record);
  if (!record_path.empty() && code == lipschitz::kExitOk) {
    std::ofstream out(record_path);
    out << record.to_json().dump(2) << "\n";
  }
  return code;
}
