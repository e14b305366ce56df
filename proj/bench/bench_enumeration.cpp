// Times the OpenMP enumeration kernels against the serial reference and
// cross-checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "leakcomp/leak.hpp"
#include "leakcomp/witness.hpp"

using namespace leakcomp;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  const int max_len = argc > 1 ? std::atoi(argv[1]) : 11;
  const int gap_len = argc > 2 ? std::atoi(argv[2]) : 10;
  const auto p = make_policy("lru:2");
  const auto q = make_policy("fifo:2");
  const EnumerationBudget budget{1ull << 40};

  std::printf("threads: %d\n", threads());
  std::printf("%-34s %10s %10s %8s\n", "kernel", "serial", "parallel", "speedup");

  bool ok = true;
  {
    const auto t0 = Clock::now();
    const auto serial =
        leak_ratio_bruteforce(*p, *q, max_len, 4, budget, Parallelism::Serial);
    const double serial_s = seconds_since(t0);

    const auto t1 = Clock::now();
    const auto parallel =
        leak_ratio_bruteforce(*p, *q, max_len, 4, budget, Parallelism::Auto);
    const double parallel_s = seconds_since(t1);

    ok = ok && serial.entries == parallel.entries;
    const std::string label =
        "ratio table, lru:2/fifo:2, l<=" + std::to_string(max_len);
    std::printf("%-34s %9.3fs %9.3fs %7.2fx\n", label.c_str(), serial_s, parallel_s,
                serial_s / parallel_s);
  }
  {
    const auto t0 = Clock::now();
    const auto serial = max_gap_search(*p, *q, gap_len, 4, budget, Parallelism::Serial);
    const double serial_s = seconds_since(t0);

    const auto t1 = Clock::now();
    const auto parallel = max_gap_search(*p, *q, gap_len, 4, budget, Parallelism::Auto);
    const double parallel_s = seconds_since(t1);

    ok = ok && serial.gap == parallel.gap && serial.trace == parallel.trace;
    const std::string label = "max-gap search, l=" + std::to_string(gap_len);
    std::printf("%-34s %9.3fs %9.3fs %7.2fx\n", label.c_str(), serial_s, parallel_s,
                serial_s / parallel_s);
  }

  if (!ok) {
    std::fprintf(stderr, "serial and parallel kernels disagree\n");
    return 1;
  }
  return 0;
}
