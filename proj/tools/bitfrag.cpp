// bitfrag: bit-level fragmentation of additive operations for a given latency.
//
// Exit codes: 0 success, 1 internal error, 2 usage, 3 unreadable or invalid
// input, 4 latency cannot be met, 5 equivalence counterexample.

#include "bitfrag/bitfrag.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

enum Exit { Ok = 0, Internal = 1, Usage = 2, BadInput = 3, NoSchedule = 4, NotEquivalent = 5 };

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw bitfrag::Error(bitfrag::Error::Code::Parse, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int exit_for(const bitfrag::Error &e) {
  using C = bitfrag::Error::Code;
  switch (e.code()) {
  case C::Parse:
  case C::Invalid:
  case C::UnsupportedWidth:
  case C::Signature: return BadInput;
  case C::Infeasible:
  case C::Schedule: return NoSchedule;
  case C::BadLatency: return Usage;
  default: return Internal;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Bit-level fragmentation and scheduling of additive dataflow graphs"};
  std::string input;
  unsigned latency = 0;
  std::optional<unsigned> n_bits;
  std::vector<std::string> emit;
  std::uint64_t seed = 1;
  bool check = false;
  bool bucket = false;
  std::string out_dir;

  app.add_option("input", input, "Design file")->required();
  app.add_option("--latency,-l", latency, "Number of clock cycles")
      ->required()
      ->check(CLI::PositiveNumber);
  app.add_option("--nbits", n_bits, "Chained 1-bit additions per cycle (default: estimated)")
      ->check(CLI::PositiveNumber);
  app.add_option("--emit", emit, "transformed | schedule | report | dot | arrivals")
      ->check(CLI::IsMember({"transformed", "schedule", "report", "dot", "arrivals"}));
  app.add_option("--seed", seed, "Seed for random equivalence vectors");
  app.add_flag("--check-equiv", check, "Check the schedule against the input design");
  app.add_flag("--bucket-fill", bucket, "Derive fragments by per-op bucket filling");
  app.add_option("--out", out_dir, "Write each emission to a file in this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? Ok : Usage;
  }

  try {
    auto parsed = bitfrag::parse(read_file(input));
    if (!parsed.ok()) {
      for (const auto &d : parsed.diagnostics)
        std::cerr << input << ": " << bitfrag::format_diagnostic(d) << '\n';
      return BadInput;
    }
    bitfrag::RunConfig config;
    config.latency = latency;
    config.n_bits = n_bits;
    config.bucket_fill = bucket;
    config.check_equiv = check;
    config.equiv.seed = seed;
    auto result = bitfrag::run_pipeline(*parsed.graph, config);

    const std::string &name = result.original.name;
    auto write = [&](const std::string &what, const std::string &suffix, const std::string &text) {
      if (out_dir.empty()) {
        std::cout << text;
        return;
      }
      std::filesystem::create_directories(out_dir);
      std::ofstream file(std::filesystem::path(out_dir) / (name + suffix), std::ios::binary);
      if (!file)
        throw bitfrag::Error(bitfrag::Error::Code::Parse, "cannot write " + what + " output");
      file << text;
    };
    for (const auto &e : emit) {
      if (e == "transformed")
        write(e, ".transformed.dfg", bitfrag::emit(result.transformed));
      else if (e == "schedule")
        write(e, ".schedule.txt", bitfrag::schedule_text(result.schedule, name) + "\n" +
                                             bitfrag::cost_table(result.original_costs, result.costs));
      else if (e == "report")
        write(e, ".report.json", bitfrag::report_json(result).dump(2) + "\n");
      else if (e == "dot")
        write(e, ".dot", bitfrag::emit_dot(result.transformed));
      else if (e == "arrivals")
        write(e, ".arrivals.txt", bitfrag::arrivals_text(result.kernel.dfg));
    }

    if (!result.equivalent()) {
      const auto &bad = result.equiv && !result.equiv->ok() ? result.equiv : result.transformed_equiv;
      std::cerr << name << ": transformed design is not equivalent; counterexample:\n"
                << bitfrag::format_counterexample(*bad->counterexample);
      return NotEquivalent;
    }
    return Ok;
  } catch (const bitfrag::Error &e) {
    std::cerr << input << ": " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception &e) {
    std::cerr << input << ": internal error: " << e.what() << '\n';
    return Internal;
  }
}
