// Writes a seeded stand-in for the public student-performance CSV.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "edudss/common/error.hpp"
#include "edudss/data/csv.hpp"
#include "edudss/data/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic student-performance CSV"};
  std::string output;
  std::size_t rows = 6607;
  std::uint64_t seed = 42;
  app.add_option("output", output, "Output CSV path")->required();
  app.add_option("--rows", rows, "Row count")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : edudss::exit_code_for(edudss::ErrorKind::kUsage);
  }

  const auto dataset = edudss::data::generate_student_data(rows, seed);
  std::ofstream out(output, std::ios::binary);
  out << edudss::data::to_csv(dataset);
  if (!out) {
    std::cerr << "error: cannot write " << output << "\n";
    return edudss::exit_code_for(edudss::ErrorKind::kData);
  }
  return 0;
}
