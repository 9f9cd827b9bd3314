// Times the serial reference and the blocked OpenMP kernel for the second
// marginal of the wavepacket model and reports their largest difference.
//
//   bench_second_marginal [n_p_reference] [n_p_blocked] [t]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef SEQMEAS_HAVE_OPENMP
#include <omp.h>
#endif

#include "seqmeas/wavepacket.hpp"

using namespace seqmeas;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int np_ref = argc > 1 ? std::atoi(argv[1]) : 32;
  const int np_big = argc > 2 ? std::atoi(argv[2]) : 256;
  const double t = argc > 3 ? std::atof(argv[3]) : 0.05;
  int threads = 1;
#ifdef SEQMEAS_HAVE_OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads %d, t %g\n", threads, t);

  WavepacketConfig cfg;
  cfg.t = t;
  cfg.window = {8, np_ref};
  const auto first = first_distribution(cfg.sigma, cfg.window);
  SecondMarginal ref, blk;
  const double t_ref = seconds([&] { ref = second_marginal(cfg, first, MarginalKernel::reference); });
  const double t_blk = seconds([&] { blk = second_marginal(cfg, first, MarginalKernel::blocked); });
  const double diff = (ref.phat - blk.phat).cwiseAbs().maxCoeff();
  std::printf("N_p %4d  reference %8.3f s  blocked %8.3f s  speedup %6.1f  max |diff| %.2e\n",
              np_ref, t_ref, t_blk, t_ref / t_blk, diff);

  cfg.window = {8, np_big};
  const auto big = first_distribution(cfg.sigma, cfg.window);
  SecondMarginal b1, b2;
  cfg.chunk = 32;
  const double t1 = seconds([&] { b1 = second_marginal(cfg, big, MarginalKernel::blocked); });
  std::printf("N_p %4d  blocked %8.3f s  S(p_hat) %.12f  deficit %.3e\n", np_big, t1, b1.entropy,
              b1.deficit);
#ifdef SEQMEAS_HAVE_OPENMP
  omp_set_num_threads(1);
  const double t2 = seconds([&] { b2 = second_marginal(cfg, big, MarginalKernel::blocked); });
  const bool same = (b1.phat.array() == b2.phat.array()).all();
  std::printf("N_p %4d  blocked, 1 thread %8.3f s  bitwise identical %s\n", np_big, t2,
              same ? "yes" : "no");
#endif
  return 0;
}
