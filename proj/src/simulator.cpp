#include "bhd/simulator.hpp"

#include "bhd/parallel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bhd {

double LOModel::sum_variance() const {
  return conv.sigma0 * conv.sigma0 * std::pow(10.0, excess_noise_db / 10.0);
}

void validate(const SimulationConfig& config) {
  validate(config.state);
  validate(config.lo.conv);
  if (!(config.lo.excess_noise_db >= 0.0) || !std::isfinite(config.lo.excess_noise_db))
    throw std::invalid_argument("excess_noise_db must be finite and >= 0");
  if (config.n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
}

SignalSampler::SignalSampler(const StateSpec& state, const QuadratureConvention& conv)
    : state_(state), conv_(conv) {
  validate(state_);
  validate(conv_);
  if (const auto* f = std::get_if<Fock>(&state_)) fock_ = std::make_shared<FockCdfTable>(f->n, conv_);
}

double SignalSampler::operator()(Engine& engine) const {
  const double s0 = conv_.sigma0;
  if (std::holds_alternative<Vacuum>(state_)) {
    std::normal_distribution<double> g(0.0, s0);
    return g(engine);
  }
  if (const auto* c = std::get_if<Coherent>(&state_)) {
    std::normal_distribution<double> g(2.0 * c->amplitude * std::cos(c->phase) * s0, s0);
    return g(engine);
  }
  if (const auto* p = std::get_if<Prcs>(&state_)) {
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double phi = phase(engine);
    std::normal_distribution<double> g(2.0 * std::sqrt(p->mu) * std::cos(phi) * s0, s0);
    return g(engine);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return fock_->inverse(u(engine));
}

double sample_signal_quadrature(const SignalSampler& sampler, Engine& engine) {
  return sampler(engine);
}

void simulate_shard(const SimulationConfig& config, const SignalSampler& sampler,
                    std::size_t shard, std::span<DetectorRecord> out) {
  Engine signal = make_substream(config.seed, Stream::signal, shard);
  Engine lo = make_substream(config.seed, Stream::local_oscillator, shard);
  std::normal_distribution<double> sum_noise(0.0, std::sqrt(config.lo.sum_variance()));
  for (auto& r : out) {
    const double d = sampler(signal);
    const double s = sum_noise(lo);
    r.i1 = 0.5 * (s + d);
    r.i2 = 0.5 * (s - d);
  }
}

std::vector<DetectorRecord> simulate(const SimulationConfig& config, Exec exec) {
  validate(config);
  const SignalSampler sampler(config.state, config.lo.conv);
  std::vector<DetectorRecord> records(config.n_samples);
  const std::size_t shards = (config.n_samples + kShardSize - 1) / kShardSize;
  auto run = [&](std::size_t k) {
    const std::size_t begin = k * kShardSize;
    const std::size_t count = std::min(kShardSize, config.n_samples - begin);
    simulate_shard(config, sampler, k, std::span(records).subspan(begin, count));
  };
  parallel_for(shards, run, exec, false);
  return records;
}

double effective_mu(double mu, double eta) {
  if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("detector efficiency must be in (0, 1]");
  if (!(mu >= 0.0)) throw std::invalid_argument("mu must be >= 0");
  return mu / eta;
}

std::vector<double> difference_samples(std::span<const DetectorRecord> records) {
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].d();
  return out;
}

std::vector<double> sum_samples(std::span<const DetectorRecord> records) {
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].s();
  return out;
}

std::vector<double> product_samples(std::span<const DetectorRecord> records) {
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out[i] = records[i].m();
  return out;
}

std::vector<DetectorRecord> to_sigma0_units(std::span<const DetectorRecord> records, double sigma0) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");
  std::vector<DetectorRecord> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    out[i] = {records[i].i1 / sigma0, records[i].i2 / sigma0};
  return out;
}

}  // namespace bhd
