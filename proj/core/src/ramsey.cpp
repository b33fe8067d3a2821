#include <algorithm>
#include <cmath>

#include "nvgyro/analysis.hpp"
#include "nvgyro/errors.hpp"
#include "nvgyro/protocols.hpp"
#include "nvgyro/units.hpp"

namespace nvgyro::protocols {

std::string ramsey_sequence_text(Manifold manifold) {
  switch (manifold) {
    case Manifold::kMs0:
      return "# m_S = 0 nuclear Ramsey\n"
             "param t\n"
             "param phi = 0\n"
             "reset\n"
             "pulse rf ms(0) pi/2\n"
             "evolve $t\n"
             "pulse rf ms(0) pi/2 phase=$phi\n"
             "pulse mw sq(-1) pi mi(+1/2)\n"
             "readout\n";
    case Manifold::kMsMinus1:
      return "# unprotected m_S = -1 nuclear Ramsey\n"
             "param t\n"
             "param phi = 0\n"
             "prepare ms=-1\n"
             "pulse rf ms(-1) pi/2\n"
             "evolve $t\n"
             "pulse rf ms(-1) pi/2 phase=$phi\n"
             "pulse mw sq(-1) pi mi(+1/2)\n"
             "readout\n";
    case Manifold::kDqProtected:
      return "# DQ-protected nuclear Ramsey\n"
             "param t\n"
             "param phi = 0\n"
             "param frac = 0.5\n"
             "prepare ms=-1\n"
             "pulse rf ms(-1) pi/2\n"
             "evolve $frac*$t\n"
             "dq\n"
             "evolve (1 - $frac)*$t\n"
             "pulse rf ms(+1) pi/2 phase=$phi\n"
             "pulse mw sq(+1) pi mi(+1/2)\n"
             "readout\n";
  }
  throw InvalidArgument("unknown manifold");
}

const seq::Sequence& ramsey_sequence(Manifold manifold) {
  static const seq::Sequence ms0 = seq::parse_sequence(ramsey_sequence_text(Manifold::kMs0));
  static const seq::Sequence msm1 = seq::parse_sequence(ramsey_sequence_text(Manifold::kMsMinus1));
  static const seq::Sequence dq = seq::parse_sequence(ramsey_sequence_text(Manifold::kDqProtected));
  switch (manifold) {
    case Manifold::kMs0: return ms0;
    case Manifold::kMsMinus1: return msm1;
    case Manifold::kDqProtected: return dq;
  }
  throw InvalidArgument("unknown manifold");
}

std::vector<double> uniform_phases(std::size_t n) {
  std::vector<double> phases(n);
  for (std::size_t i = 0; i < n; ++i) phases[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  return phases;
}

void RamseyConfig::validate() const {
  if (phases_rad.size() < 6) throw InvalidArgument("Ramsey phase sweep needs at least 6 points");
  if (times_s.empty()) throw InvalidArgument("Ramsey scan needs at least one time");
  for (std::size_t i = 0; i < times_s.size(); ++i) {
    if (!(times_s[i] >= 0.0) || (i > 0 && !(times_s[i] > times_s[i - 1]))) {
      throw InvalidArgument("Ramsey times must be >= 0 and strictly increasing");
    }
  }
  if (draws < 1) throw InvalidArgument("Ramsey scan needs at least one draw");
  if (!(dq_fraction >= 0.0 && dq_fraction <= 1.0)) throw InvalidArgument("dq_fraction must lie in [0, 1]");
  if (sequence) {
    for (const char* name : {"t", "phi"}) {
      const auto& ps = sequence->params;
      if (std::none_of(ps.begin(), ps.end(), [&](const seq::ParamDecl& d) { return d.name == name; })) {
        throw InvalidArgument(std::string("custom Ramsey sequence must declare param ") + name);
      }
    }
  }
  params.validate();
  field.validate();
  noise.validate();
}

RamseyTable ramsey_scan(const RamseyConfig& cfg) {
  cfg.validate();
  const seq::Sequence& sequence = cfg.sequence ? *cfg.sequence : ramsey_sequence(cfg.manifold);
  const bool has_frac = std::any_of(sequence.params.begin(), sequence.params.end(),
                                    [](const seq::ParamDecl& d) { return d.name == "frac"; });
  const seq::Executor exec(cfg.params, cfg.field);
  const std::size_t nt = cfg.times_s.size();
  const std::size_t np = cfg.phases_rad.size();

  const noise::ExperimentFn experiment = [&](const noise::NoiseDraw& draw, std::size_t) {
    const seq::DrawContext ctx = exec.prepare(draw);
    noise::SignalTable table(nt * np);
    seq::Bindings b;
    if (has_frac) b["frac"] = cfg.dq_fraction;
    for (std::size_t it = 0; it < nt; ++it) {
      b["t"] = cfg.times_s[it];
      double mean = 0.0;
      for (std::size_t ip = 0; ip < np; ++ip) {
        b["phi"] = cfg.phases_rad[ip];
        const double value = exec.run(sequence, ctx, b).readout;
        table[it * np + ip] = {cfg.times_s[it], value, 0.0};
        mean += value;
      }
      mean /= static_cast<double>(np);
      for (std::size_t ip = 0; ip < np; ++ip) table[it * np + ip].baseline = mean;
    }
    return table;
  };

  noise::EnsembleOptions opts;
  opts.threads = cfg.threads;
  opts.t1e_s = cfg.params.t1e_s;
  const noise::EnsembleResult ens = noise::ensemble_average(experiment, cfg.noise, cfg.draws, cfg.seed, opts);

  const auto slice = [&](const noise::SignalTable& t, std::size_t it) {
    std::vector<double> y(np);
    for (std::size_t ip = 0; ip < np; ++ip) y[ip] = t[it * np + ip].value;
    return y;
  };

  RamseyTable out;
  for (std::size_t it = 0; it < nt; ++it) {
    RamseyPoint p;
    p.t_s = cfg.times_s[it];
    try {
      const analysis::FitResult fit = analysis::fit_sinusoid(cfg.phases_rad, slice(ens.mean, it));
      p.offset = fit.params[analysis::sinusoid::kOffset];
      p.contrast = fit.params[analysis::sinusoid::kContrast];
      p.phase = fit.params[analysis::sinusoid::kPhase];
      for (const std::string& w : fit.warnings) {
        p.fit_warning += (p.fit_warning.empty() ? "" : "; ") + w;
      }
      if (ens.batch_means.size() >= 2) {
        std::vector<double> cs;
        for (const noise::SignalTable& batch : ens.batch_means) {
          cs.push_back(analysis::fit_sinusoid(cfg.phases_rad, slice(batch, it))
                           .params[analysis::sinusoid::kContrast]);
        }
        p.contrast_err = analysis::summary_stats(cs).std / std::sqrt(static_cast<double>(cs.size()));
      }
    } catch (const FitError& e) {
      p.fit_ok = false;
      p.fit_warning = e.what();
    }
    out.points.push_back(p);
  }
  return out;
}

T2Estimate fit_t2n(const RamseyTable& table) {
  std::vector<double> t, c;
  for (const RamseyPoint& p : table.points) {
    if (!p.fit_ok) continue;
    t.push_back(p.t_s);
    c.push_back(p.contrast);
  }
  if (t.size() < 4) throw FitError("T2n* fit needs at least 4 fitted time points");
  const analysis::FitResult fit = analysis::fit_exponential(t, c);
  T2Estimate est;
  est.amplitude = fit.params[analysis::exponential::kAmplitude];
  est.t2_s = fit.params[analysis::exponential::kTime];
  est.t2_err_s = fit.std_errors[analysis::exponential::kTime];
  return est;
}

DqResult dq_protected_ramsey(RamseyConfig cfg) {
  cfg.manifold = Manifold::kDqProtected;
  DqResult result;
  result.table = ramsey_scan(cfg);
  try {
    result.t2 = fit_t2n(result.table);
  } catch (const FitError& e) {
    result.fit_error = e.what();
  }
  return result;
}

noise::NoiseModel calibrated_unprotected_scenario(const spin::NVParams& params, double t2_s) {
  if (!(t2_s > 0.0)) throw InvalidArgument("target dephasing time must be > 0");
  if (params.dazz_dt_hz_per_k == 0.0) throw InvalidArgument("dA_zz/dT must be nonzero");
  noise::NoiseModel model = noise::NoiseModel::magnetic_from(params);
  const double hwhm_hz = 1.0 / (kTwoPi * t2_s);
  model.temperature = {noise::Distribution::kLorentzian, hwhm_hz / std::abs(params.dazz_dt_hz_per_k)};
  return model;
}

}  // namespace nvgyro::protocols
