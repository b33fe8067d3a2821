#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <thread>

#include "nvgyro/errors.hpp"
#include "nvgyro/noise.hpp"

namespace nvgyro::noise {
namespace {

struct BatchOutcome {
  SignalTable sum;
  std::optional<std::size_t> failed_index;
  std::string failure;
};

std::size_t resolve_threads(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NVGYRO_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void check_shape(const SignalTable& reference, const SignalTable& table,
                 std::size_t draw_index) {
  if (table.size() != reference.size()) {
    throw EnsembleError(draw_index, "signal table length changed between draws");
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].time_s != reference[i].time_s) {
      throw EnsembleError(draw_index, "signal time grid changed between draws");
    }
  }
}

}  // namespace

EnsembleResult ensemble_average(const ExperimentFn& experiment_fn,
                                const NoiseModel& model, std::size_t n_draws,
                                std::uint64_t seed, const EnsembleOptions& options) {
  if (n_draws == 0) throw InvalidArgument("ensemble_average needs n_draws >= 1");
  model.validate();
  if (model.t1e_envelope && !(options.t1e_s > 0.0)) {
    throw InvalidArgument("T1e envelope enabled without a positive T1e");
  }

  // The first draw fixes the table shape; it is evaluated on the calling
  // thread so the reference never depends on scheduling.
  SignalTable reference;
  try {
    reference = experiment_fn(sample(model, seed, 0), 0);
  } catch (const EnsembleError&) {
    throw;
  } catch (const std::exception& e) {
    throw EnsembleError(0, e.what());
  }
  if (reference.empty()) throw EnsembleError(0, "experiment returned an empty table");

  const auto apply_envelope = [&](SignalTable& table) {
    if (!model.t1e_envelope) return;
    for (SignalPoint& p : table) {
      const double decay = std::exp(-p.time_s / (1.5 * options.t1e_s));
      p.value = p.baseline + decay * (p.value - p.baseline);
    }
  };

  const std::size_t n_batches = std::min(kBatches, n_draws);
  std::vector<BatchOutcome> outcomes(n_batches);
  const auto batch_begin = [&](std::size_t b) { return b * n_draws / n_batches; };

  const auto run_batch = [&](std::size_t b) {
    BatchOutcome& out = outcomes[b];
    out.sum.assign(reference.size(), SignalPoint{});
    for (std::size_t i = 0; i < reference.size(); ++i) out.sum[i].time_s = reference[i].time_s;
    for (std::size_t k = batch_begin(b); k < batch_begin(b + 1); ++k) {
      SignalTable table;
      try {
        table = k == 0 ? reference : experiment_fn(sample(model, seed, k), k);
        check_shape(reference, table, k);
      } catch (const std::exception& e) {
        out.failed_index = k;
        out.failure = e.what();
        return;
      }
      apply_envelope(table);
      for (std::size_t i = 0; i < table.size(); ++i) {
        out.sum[i].value += table[i].value;
        out.sum[i].baseline += table[i].baseline;
      }
    }
  };

  const std::size_t n_threads = std::min(resolve_threads(options.threads), n_batches);
  if (n_threads <= 1) {
    for (std::size_t b = 0; b < n_batches; ++b) {
      run_batch(b);
      if (outcomes[b].failed_index) break;
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t b = next++; b < n_batches; b = next++) run_batch(b);
      });
    }
    for (std::thread& w : workers) w.join();
  }

  for (const BatchOutcome& out : outcomes) {
    if (out.failed_index) {
      const std::string& msg = out.failure;
      // EnsembleError messages already carry the "draw N: " prefix.
      const std::string prefix = "draw " + std::to_string(*out.failed_index) + ": ";
      throw EnsembleError(*out.failed_index,
                          msg.rfind(prefix, 0) == 0 ? msg.substr(prefix.size()) : msg);
    }
  }

  EnsembleResult result;
  result.draws = n_draws;
  result.mean.assign(reference.size(), SignalPoint{});
  for (std::size_t b = 0; b < n_batches; ++b) {
    const double count = static_cast<double>(batch_begin(b + 1) - batch_begin(b));
    SignalTable batch_mean = outcomes[b].sum;
    for (std::size_t i = 0; i < batch_mean.size(); ++i) {
      result.mean[i].value += outcomes[b].sum[i].value;
      result.mean[i].baseline += outcomes[b].sum[i].baseline;
      batch_mean[i].value /= count;
      batch_mean[i].baseline /= count;
    }
    result.batch_means.push_back(std::move(batch_mean));
  }
  const double n = static_cast<double>(n_draws);
  for (std::size_t i = 0; i < result.mean.size(); ++i) {
    result.mean[i].time_s = reference[i].time_s;
    result.mean[i].value /= n;
    result.mean[i].baseline /= n;
  }
  return result;
}

}  // namespace nvgyro::noise
