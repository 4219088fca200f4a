#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "bhd/parallel.hpp"
#include "bhd/quantum_states.hpp"
#include "bhd/rng.hpp"

namespace bhd {

// Local oscillator: shot-noise scale plus white excess noise on the sum
// current, quoted as a variance ratio in dB.
struct LOModel {
  QuadratureConvention conv{};
  double excess_noise_db = 0.0;

  double sum_variance() const;  // sigma0^2 * 10^(dB/10)
};

struct DetectorRecord {
  double i1 = 0.0;
  double i2 = 0.0;

  double d() const { return i1 - i2; }
  double s() const { return i1 + i2; }
  double m() const { return i1 * i2; }
};

struct SimulationConfig {
  StateSpec state = Vacuum{};
  LOModel lo{};
  std::size_t n_samples = 1'000'000;
  std::uint64_t seed = 1;
};

void validate(const SimulationConfig& config);

// Draws difference-current samples for one signal state. Fock states use a
// tabulated inverse CDF built once at construction.
class SignalSampler {
 public:
  SignalSampler(const StateSpec& state, const QuadratureConvention& conv);
  double operator()(Engine& engine) const;

  const StateSpec& state() const { return state_; }

 private:
  StateSpec state_;
  QuadratureConvention conv_;
  std::shared_ptr<const FockCdfTable> fock_;
};

double sample_signal_quadrature(const SignalSampler& sampler, Engine& engine);

// Samples per substream shard. Output is independent of the worker count
// because each shard seeds its own engines from (seed, stream, shard).
inline constexpr std::size_t kShardSize = std::size_t{1} << 16;

std::vector<DetectorRecord> simulate(const SimulationConfig& config, Exec exec = Exec::parallel);

// Fills records [begin, end) of shard `shard`; the building block of both
// execution paths.
void simulate_shard(const SimulationConfig& config, const SignalSampler& sampler,
                    std::size_t shard, std::span<DetectorRecord> out);

// Mean photon number to assume when detectors share efficiency eta.
double effective_mu(double mu, double eta);

std::vector<double> difference_samples(std::span<const DetectorRecord> records);
std::vector<double> sum_samples(std::span<const DetectorRecord> records);
std::vector<double> product_samples(std::span<const DetectorRecord> records);

// Rescales both currents by 1/sigma0 (raw units to sigma0 units).
std::vector<DetectorRecord> to_sigma0_units(std::span<const DetectorRecord> records, double sigma0);

}  // namespace bhd
