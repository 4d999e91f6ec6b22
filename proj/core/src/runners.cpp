#include "anchor/runners.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "anchor/allocation.hpp"
#include "anchor/potential.hpp"
#include "anchor/stability.hpp"

namespace anchor {

namespace {

using ordered_json = nlohmann::ordered_json;

// Maps the library's exception vocabulary onto the exit-code contract.
// Value errors reachable from here always trace back to configured inputs,
// so invalid_argument lands on the config code.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const SimulationDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalAbort;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalAbort;
  }
}

BodyState initial_state(const InitialStateSpec& spec, double omega_max,
                        std::mt19937_64& rng) {
  BodyState s;
  switch (spec.mode) {
    case InitialStateSpec::Mode::Random:
      s.R = random_rotation(rng);
      s.omega = random_in_ball(rng, omega_max);
      break;
    case InitialStateSpec::Mode::Quaternion:
      s.R = Rotation::from_quaternion(spec.q(0), spec.q(1), spec.q(2),
                                      spec.q(3));
      s.omega = spec.omega;
      s.p_y = spec.p_y;
      s.v_y = spec.v_y;
      break;
    case InitialStateSpec::Mode::AxisAngle:
      s.R = Rotation::from_axis_angle(spec.axis, spec.angle);
      s.omega = spec.omega;
      s.p_y = spec.p_y;
      s.v_y = spec.v_y;
      break;
  }
  return s;
}

Vector3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    const Vector3 v(normal(rng), normal(rng), normal(rng));
    const double n = v.norm();
    if (n >= 1e-6) return v / n;
  }
}

ordered_json vec3_json(const Vector3& v) {
  return ordered_json::array({v.x(), v.y(), v.z()});
}

ordered_json quat_json(const Rotation& R) {
  const auto& q = R.quaternion();
  return ordered_json::array({q.w(), q.x(), q.y(), q.z()});
}

const char* outcome_name(ConvergedTo kind) {
  switch (kind) {
    case ConvergedTo::PitchSet:
      return "pitch_set";
    case ConvergedTo::AntipodalSet:
      return "antipodal_set";
    case ConvergedTo::None:
      break;
  }
  return "none";
}

const char* definiteness_name(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite:
      return "positive_definite";
    case Definiteness::PositiveSemidefinite:
      return "positive_semidefinite";
    case Definiteness::NegativeDefinite:
      return "negative_definite";
    case Definiteness::NegativeSemidefinite:
      return "negative_semidefinite";
    case Definiteness::Indefinite:
      break;
  }
  return "indefinite";
}

const char* classification_name(StabilityClass c) {
  switch (c) {
    case StabilityClass::AsymptoticallyStable:
      return "asymptotically_stable";
    case StabilityClass::Saddle:
      return "saddle";
    case StabilityClass::Indeterminate:
      break;
  }
  return "indeterminate";
}

int write_text_file(const std::filesystem::path& path,
                    const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open " << path << " for writing\n";
    return kExitUnwritablePath;
  }
  out << text;
  out.flush();
  if (!out) {
    std::cerr << "error: write to " << path << " failed\n";
    return kExitUnwritablePath;
  }
  return kExitOk;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << kTrajectoryCsvHeader << "\n";
  for (const auto& s : traj.samples) {
    const auto& q = s.state.R.quaternion();
    out << format_double(s.state.t) << ',' << format_double(q.w()) << ','
        << format_double(q.x()) << ',' << format_double(q.y()) << ','
        << format_double(q.z()) << ',' << format_double(s.state.omega.x())
        << ',' << format_double(s.state.omega.y()) << ','
        << format_double(s.state.omega.z()) << ','
        << format_double(s.state.p_y) << ',' << format_double(s.state.v_y)
        << ',' << format_double(s.phi) << ',' << format_double(s.eta) << ','
        << format_double(s.eta_rate) << ',' << format_double(s.swing) << ','
        << format_double(s.pitch) << "\n";
  }
}

std::filesystem::path basin_runs_path(const std::filesystem::path& summary) {
  std::filesystem::path p = summary;
  p.replace_extension();
  p += ".runs.jsonl";
  return p;
}

int run_simulate(const ExperimentConfig& cfg,
                 const std::filesystem::path& out_csv) {
  return guarded([&] {
    std::mt19937_64 rng(cfg.monte_carlo.seed);
    const BodyState start =
        initial_state(cfg.initial, cfg.monte_carlo.omega_max, rng);
    const Trajectory traj =
        simulate(start, cfg.inertia, cfg.gains, cfg.template_params,
                 cfg.integrator.h, cfg.integrator.duration);
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot open " << out_csv << " for writing\n";
      return kExitUnwritablePath;
    }
    write_trajectory_csv(traj, out);
    out.flush();
    if (!out) {
      std::cerr << "error: write to " << out_csv << " failed\n";
      return kExitUnwritablePath;
    }
    return kExitOk;
  });
}

int run_basin(const ExperimentConfig& cfg,
              const std::filesystem::path& out_summary, int workers) {
  return run_basin(cfg, out_summary, workers, nullptr);
}

int run_basin(const ExperimentConfig& cfg,
              const std::filesystem::path& out_summary, int workers,
              BasinSummary* summary_out) {
  return guarded([&] {
    const int n = cfg.monte_carlo.runs;
    int k = workers;
    if (k <= 0) {
      const unsigned hc = std::thread::hardware_concurrency();
      k = hc == 0 ? 1 : static_cast<int>(hc);
    }
    k = std::clamp(k, 1, n);

    struct RunRecord {
      Rotation R0;
      Vector3 omega0;
      RunOutcome outcome;
    };
    std::vector<RunRecord> records(static_cast<std::size_t>(n));

    // Each run owns a private RNG stream derived as seed xor run index, so
    // the records (and therefore every byte written below) are independent
    // of how runs are distributed over workers.
    const auto do_run = [&](int i) {
      std::mt19937_64 rng(cfg.monte_carlo.seed ^
                          static_cast<std::uint64_t>(i));
      RunRecord& rec = records[static_cast<std::size_t>(i)];
      const BodyState start =
          initial_state(cfg.initial, cfg.monte_carlo.omega_max, rng);
      rec.R0 = start.R;
      rec.omega0 = start.omega;
      rec.outcome = simulate_until_converged(
          start, cfg.inertia, cfg.gains, cfg.template_params, cfg.integrator.h,
          cfg.integrator.duration, cfg.probe.angle, cfg.probe.omega);
    };

    if (k == 1) {
      for (int i = 0; i < n; ++i) do_run(i);
    } else {
      std::atomic<int> next{0};
      std::atomic<bool> abort{false};
      std::mutex err_mutex;
      std::exception_ptr first_error;
      const auto worker = [&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= n || abort.load()) return;
          try {
            do_run(i);
          } catch (...) {
            {
              const std::lock_guard<std::mutex> lock(err_mutex);
              if (!first_error) first_error = std::current_exception();
            }
            abort.store(true);
            return;
          }
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(k));
      for (int t = 0; t < k; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
      if (first_error) std::rethrow_exception(first_error);
    }

    BasinSummary summary;
    summary.n_total = n;
    summary.seed = cfg.monte_carlo.seed;
    std::vector<double> times;
    for (const auto& rec : records) {
      switch (rec.outcome.kind) {
        case ConvergedTo::PitchSet:
          ++summary.n_converged_p;
          times.push_back(rec.outcome.time);
          break;
        case ConvergedTo::AntipodalSet:
          ++summary.n_converged_q;
          times.push_back(rec.outcome.time);
          break;
        case ConvergedTo::None:
          ++summary.n_undecided;
          break;
      }
    }
    if (!times.empty()) {
      std::sort(times.begin(), times.end());
      const std::size_t m = times.size();
      summary.median_convergence_time =
          m % 2 == 1 ? times[m / 2]
                     : 0.5 * (times[m / 2 - 1] + times[m / 2]);
      summary.max_convergence_time = times.back();
    }

    // Single-writer emission after the deterministic merge above.
    std::string runs_text;
    for (int i = 0; i < n; ++i) {
      const RunRecord& rec = records[static_cast<std::size_t>(i)];
      ordered_json line;
      line["run"] = i;
      line["q0"] = quat_json(rec.R0);
      line["omega0"] = vec3_json(rec.omega0);
      line["outcome"] = outcome_name(rec.outcome.kind);
      if (rec.outcome.kind == ConvergedTo::None) {
        line["time"] = nullptr;
      } else {
        line["time"] = rec.outcome.time;
      }
      line["end_time"] = rec.outcome.end_time;
      line["final_swing"] = rec.outcome.final_swing;
      line["final_eta"] = rec.outcome.final_eta;
      line["steps"] = rec.outcome.steps;
      runs_text += line.dump();
      runs_text += "\n";
    }

    ordered_json doc;
    doc["n_total"] = summary.n_total;
    doc["n_converged_p"] = summary.n_converged_p;
    doc["n_converged_q"] = summary.n_converged_q;
    doc["n_undecided"] = summary.n_undecided;
    if (summary.median_convergence_time) {
      doc["median_convergence_time"] = *summary.median_convergence_time;
      doc["max_convergence_time"] = *summary.max_convergence_time;
    } else {
      doc["median_convergence_time"] = nullptr;
      doc["max_convergence_time"] = nullptr;
    }
    doc["seed"] = summary.seed;
    doc["omega_max"] = cfg.monte_carlo.omega_max;
    doc["duration"] = cfg.integrator.duration;
    doc["h"] = cfg.integrator.h;
    doc["tol_angle"] = cfg.probe.angle;
    doc["tol_omega"] = cfg.probe.omega;

    int rc = write_text_file(out_summary, doc.dump(2) + "\n");
    if (rc != kExitOk) return rc;
    rc = write_text_file(basin_runs_path(out_summary), runs_text);
    if (rc != kExitOk) return rc;
    if (summary_out) *summary_out = summary;
    return kExitOk;
  });
}

int run_linearize(const ExperimentConfig& cfg, std::ostream& out) {
  return guarded([&] {
    const auto emit = [&](Equilibrium at) {
      const LinearizedSystem sys =
          linearize(at, cfg.inertia, cfg.gains, cfg.template_params);
      ordered_json node;
      ordered_json rows = ordered_json::array();
      for (int i = 0; i < 6; ++i) {
        ordered_json row = ordered_json::array();
        for (int j = 0; j < 6; ++j) row.push_back(sys.A(i, j));
        rows.push_back(row);
      }
      node["A"] = rows;
      ordered_json eigs = ordered_json::array();
      for (const auto& z : sys.eigenvalues) {
        eigs.push_back(ordered_json{{"re", z.real()}, {"im", z.imag()}});
      }
      node["eigenvalues"] = eigs;
      node["classification"] = classification_name(sys.classification);

      // The two blocks whose definiteness carries the stability argument:
      // potential curvature plus template stiffness, and transverse damping
      // plus template damping.
      const double transverse = at == Equilibrium::PitchSet ? 1.0 : -1.0;
      Matrix3 stiffness = Matrix3::Zero();
      stiffness.diagonal() << transverse, cfg.template_params.gamma,
          transverse;
      Matrix3 damping = cfg.gains.damping();
      damping(1, 1) = cfg.template_params.beta;
      const auto block_json = [](const Matrix3& m) {
        ordered_json b;
        ordered_json mr = ordered_json::array();
        for (int i = 0; i < 3; ++i) {
          ordered_json row = ordered_json::array();
          for (int j = 0; j < 3; ++j) row.push_back(m(i, j));
          mr.push_back(row);
        }
        b["matrix"] = mr;
        b["definiteness"] = definiteness_name(definiteness(m));
        return b;
      };
      node["stiffness_block"] = block_json(stiffness);
      node["damping_block"] = block_json(damping);
      return node;
    };

    ordered_json doc;
    doc["pitch_set"] = emit(Equilibrium::PitchSet);
    doc["antipodal_set"] = emit(Equilibrium::AntipodalSet);
    out << doc.dump(2) << "\n";
    return kExitOk;
  });
}

int run_verify(const ExperimentConfig& cfg, std::ostream& out,
               bool inject_grad_sign_flip) {
  return guarded([&] {
    const VerifyConfig& vc = cfg.verify;
    std::mt19937_64 rng(vc.seed);
    ordered_json properties = ordered_json::array();

    // Gradient versus a central finite difference of the potential along
    // the three angular-velocity coordinate curves R exp(-t skew(e_i)).
    {
      const double d = vc.fd_step;
      double max_err = 0.0;
      Rotation worst;
      for (int i = 0; i < vc.rotations; ++i) {
        const Rotation R = random_rotation(rng);
        Vector3 g = grad(R);
        if (inject_grad_sign_flip) g = -g;
        Vector3 fd;
        for (int a = 0; a < 3; ++a) {
          Vector3 e = Vector3::Zero();
          e(a) = 1.0;
          const double fp = phi(R * Rotation::from_axis_angle(e, -d));
          const double fm = phi(R * Rotation::from_axis_angle(e, d));
          fd(a) = (fp - fm) / (2.0 * d);
        }
        const double err = (fd - g).lpNorm<Eigen::Infinity>();
        if (err > max_err) {
          max_err = err;
          worst = R;
        }
      }
      ordered_json p;
      p["name"] = "gradient_fd";
      p["samples"] = vc.rotations;
      p["fd_step"] = d;
      p["max_abs_error"] = max_err;
      p["tolerance"] = vc.grad_tol;
      p["worst_q"] = quat_json(worst);
      p["passed"] = max_err <= vc.grad_tol;
      properties.push_back(p);
    }

    // Trace-form directional derivative against grad . u.
    {
      double max_err = 0.0;
      Rotation worst;
      Vector3 worst_u = Vector3::Zero();
      for (int i = 0; i < vc.rotations; ++i) {
        const Rotation R = random_rotation(rng);
        const Vector3 u = random_in_ball(rng, 1.0);
        const double err = std::abs(grad_trace_form(R, u) - grad(R).dot(u));
        if (err > max_err) {
          max_err = err;
          worst = R;
          worst_u = u;
        }
      }
      ordered_json p;
      p["name"] = "gradient_trace_form";
      p["samples"] = vc.rotations;
      p["max_abs_error"] = max_err;
      p["tolerance"] = vc.trace_tol;
      p["worst_q"] = quat_json(worst);
      p["worst_u"] = vec3_json(worst_u);
      p["passed"] = max_err <= vc.trace_tol;
      properties.push_back(p);
    }

    // Hessian values on both critical circles, the quadratic-form identity,
    // and a second-order Taylor remainder bound.
    {
      std::uniform_real_distribution<double> angle(-kPi, kPi);
      Matrix3 h_min = Matrix3::Zero();
      h_min.diagonal() << 1.0, 0.0, 1.0;
      Matrix3 h_max = -h_min;
      double max_h_err = 0.0;
      double max_quad_err = 0.0;
      double max_taylor_excess = 0.0;
      const double t = 1e-3;
      Rotation worst;
      for (int i = 0; i < vc.rotations; ++i) {
        const Rotation Rp =
            Rotation::from_axis_angle(kPitchAxis, angle(rng));
        const double a = angle(rng);
        const Rotation Rq = Rotation::from_axis_angle(
            Vector3(std::cos(a), 0.0, std::sin(a)), kPi);
        const Vector3 u = random_unit(rng);
        for (const Rotation* R : {&Rp, &Rq}) {
          const Matrix3 H = hessian(*R);
          const Matrix3& want = R == &Rp ? h_min : h_max;
          const double h_err = (H - want).cwiseAbs().maxCoeff();
          const double q = hessian_quadratic_form(*R, u);
          const double quad_err = std::abs(q - u.dot(H * u));
          const double dphi =
              phi(*R * Rotation::from_axis_angle(u, t)) - phi(*R);
          const double taylor_excess =
              std::abs(dphi - 0.5 * t * t * q) - t * t * t;
          if (h_err > max_h_err) {
            max_h_err = h_err;
            worst = *R;
          }
          max_quad_err = std::max(max_quad_err, quad_err);
          max_taylor_excess = std::max(max_taylor_excess, taylor_excess);
        }
      }
      ordered_json p;
      p["name"] = "hessian_critical";
      p["samples"] = vc.rotations;
      p["max_hessian_error"] = max_h_err;
      p["hessian_tolerance"] = vc.hessian_tol;
      p["max_quadratic_form_error"] = max_quad_err;
      p["quadratic_form_tolerance"] = vc.quad_form_tol;
      p["taylor_step"] = t;
      p["max_taylor_excess_over_t3"] = max_taylor_excess;
      p["worst_q"] = quat_json(worst);
      p["passed"] = max_h_err <= vc.hessian_tol &&
                    max_quad_err <= vc.quad_form_tol &&
                    max_taylor_excess <= 1e-14;
      properties.push_back(p);
    }

    // Dissipation identity along anchoring-only trajectories: eta never
    // rises between steps, and the discrete rate matches the analytic one.
    // The rate comparison pairs a central difference of eta with the
    // Simpson-weighted analytic rate over the same two steps; both sides
    // are fourth-order consistent, so the residual measures violations of
    // the identity rather than h^2 discretization noise.
    {
      TemplateParams off;
      off.enabled = false;
      double max_step_increase = -std::numeric_limits<double>::infinity();
      double sum_sq = 0.0;
      std::int64_t count = 0;
      Rotation worst;
      Vector3 worst_omega = Vector3::Zero();
      for (int j = 0; j < vc.trajectories; ++j) {
        BodyState start;
        start.R = random_rotation(rng);
        start.omega = random_in_ball(rng, cfg.monte_carlo.omega_max);
        const Trajectory traj =
            simulate(start, cfg.inertia, cfg.gains, off, cfg.integrator.h,
                     vc.trajectory_duration);
        const auto& s = traj.samples;
        for (std::size_t k = 0; k + 1 < s.size(); ++k) {
          const double inc = s[k + 1].eta - s[k].eta;
          if (inc > max_step_increase) {
            max_step_increase = inc;
            worst = start.R;
            worst_omega = start.omega;
          }
        }
        for (std::size_t k = 1; k + 1 < s.size(); ++k) {
          const double fd =
              (s[k + 1].eta - s[k - 1].eta) / (2.0 * traj.h);
          const double rate = (s[k - 1].eta_rate + 4.0 * s[k].eta_rate +
                               s[k + 1].eta_rate) /
                              6.0;
          const double r = fd - rate;
          sum_sq += r * r;
          ++count;
        }
      }
      const double rms = count > 0 ? std::sqrt(sum_sq / count) : 0.0;
      ordered_json p;
      p["name"] = "energy_dissipation";
      p["trajectories"] = vc.trajectories;
      p["duration"] = vc.trajectory_duration;
      p["h"] = cfg.integrator.h;
      p["omega_max"] = cfg.monte_carlo.omega_max;
      p["max_step_increase"] = max_step_increase;
      p["step_tolerance"] = vc.energy_step_tol;
      p["rate_rms_error"] = rms;
      p["rate_rms_tolerance"] = vc.energy_rate_rms_tol;
      p["worst_q"] = quat_json(worst);
      p["worst_omega"] = vec3_json(worst_omega);
      p["passed"] = max_step_increase <= vc.energy_step_tol &&
                    rms <= vc.energy_rate_rms_tol;
      properties.push_back(p);
    }

    // Limit-set balance: generically broken off the critical circles (the
    // sampled minimum stays above the floor), identically zero on the pitch
    // set for every spin rate.
    {
      std::uniform_real_distribution<double> alpha_dist(0.0, 2.0);
      std::uniform_real_distribution<double> angle(-kPi, kPi);
      double min_residual = std::numeric_limits<double>::infinity();
      Rotation worst;
      double worst_alpha = 0.0;
      for (int i = 0; i < vc.limit_set_samples; ++i) {
        const Rotation R = random_rotation(rng);
        const double alpha = alpha_dist(rng);
        const double res = limit_set_residual(R, alpha, cfg.inertia).norm();
        if (res < min_residual) {
          min_residual = res;
          worst = R;
          worst_alpha = alpha;
        }
      }
      double max_on_pitch_set = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const Rotation Rp =
            Rotation::from_axis_angle(kPitchAxis, angle(rng));
        const double res =
            limit_set_residual(Rp, alpha_dist(rng), cfg.inertia).norm();
        max_on_pitch_set = std::max(max_on_pitch_set, res);
      }
      ordered_json p;
      p["name"] = "limit_set_balance";
      p["samples"] = vc.limit_set_samples;
      p["min_residual"] = min_residual;
      p["residual_floor"] = vc.limit_set_min;
      p["max_on_pitch_set"] = max_on_pitch_set;
      p["worst_q"] = quat_json(worst);
      p["worst_alpha"] = worst_alpha;
      p["passed"] =
          min_residual >= vc.limit_set_min && max_on_pitch_set <= 1e-18;
      properties.push_back(p);
    }

    bool all_passed = true;
    for (const auto& p : properties) {
      if (!p["passed"].get<bool>()) all_passed = false;
    }
    ordered_json doc;
    doc["seed"] = vc.seed;
    doc["properties"] = properties;
    doc["passed"] = all_passed;
    out << doc.dump(2) << "\n";
    return all_passed ? kExitOk : kExitVerifyFailed;
  });
}

int run_allocate(const ExperimentConfig& cfg, std::ostream& out) {
  return guarded([&] {
    const StanceConfig& st = cfg.stance;
    Wrench w;
    w.force = st.force;
    w.torque = st.torque;
    const Vector3 d = torque_to_difference(st.geometry.q, w.torque);
    const Allocation alloc =
        allocate(st.geometry, w, st.f_min, st.gravity_ff);

    Vector3 s = w.force;
    if (st.gravity_ff) s.z() += *st.gravity_ff;
    const Wrench rec = reconstruct_wrench(alloc.forces, st.geometry);
    const double force_residual =
        (alloc.forces.f_l + alloc.forces.f_r - s).norm();
    const double torque_residual =
        (st.geometry.q.cross(alloc.forces.f_l - alloc.forces.f_r) -
         alloc.forces.sigma * w.torque)
            .norm();

    ordered_json doc;
    doc["d"] = vec3_json(d);
    doc["sigma"] = alloc.forces.sigma;
    doc["feasible"] = alloc.feasible;
    doc["f_l"] = vec3_json(alloc.forces.f_l);
    doc["f_r"] = vec3_json(alloc.forces.f_r);
    doc["force_sum"] = vec3_json(s);
    doc["force_residual"] = force_residual;
    doc["torque_residual"] = torque_residual;
    doc["reconstructed_force"] = vec3_json(rec.force);
    doc["reconstructed_torque"] = vec3_json(rec.torque);
    doc["pitch_coupling_residual"] =
        vec3_json(pitch_coupling_residual(st.geometry.p, s));
    out << doc.dump(2) << "\n";
    return kExitOk;
  });
}

}  // namespace anchor
