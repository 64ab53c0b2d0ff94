#pragma once

#include <cstddef>
#include <string>

namespace mudscope::cli {

struct BenchOptions {
  std::string file;
  int copies = 1;
};

struct BenchReport {
  int copies = 0;
  double parseSeconds = 0;
  double resolveSeconds = 0;
  double mergePruneSeconds = 0;
  double exportSeconds = 0;
  double totalSeconds = 0;
  double peakRssMb = 0;
  std::size_t nodes = 0;
  std::size_t links = 0;
  std::size_t promises = 0;
  std::size_t exportBytes = 0;

  std::string toJson() const;
};

// Loads `copies` renamed copies of one profile into a fresh graph and exports
// it. Each copy gets its own MUD-URL under the original authority. Throws
// std::runtime_error when the file is unreadable or does not parse.
BenchReport runBench(const BenchOptions& options);

// Peak resident set size of this process so far, in MiB.
double peakRssMb();

}  // namespace mudscope::cli
