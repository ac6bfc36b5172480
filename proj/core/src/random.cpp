#include "dzgt/random.hpp"

#include <stdexcept>

namespace dzgt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t state = splitmix64(master);
  for (std::uint64_t coord : path) {
    // Absorb the coordinate, then mix; 0x512c... breaks the trivial fixed point at 0.
    state = splitmix64(state ^ (coord + 0x512cd4ee8da342d1ULL));
  }
  return state;
}

Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

Rng agent_stream(std::uint64_t run_seed, long epoch, int agent, StreamRole role) {
  return make_stream(run_seed, {static_cast<std::uint64_t>(epoch),
                                static_cast<std::uint64_t>(agent),
                                static_cast<std::uint64_t>(role)});
}

double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

NoiseModel NoiseModel::normal(double mean, double std_dev, std::uint64_t stream_id) {
  if (!(std_dev >= 0.0)) throw std::invalid_argument("NoiseModel: std_dev must be >= 0");
  return NoiseModel{mean, std_dev, stream_id};
}

}  // namespace dzgt
