// SPDX-License-Identifier: Apache-2.0
#include "mfpg/trainer.hpp"

#include <cmath>
#include <stdexcept>

namespace mfpg {

void TrainerConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("TrainerConfig: budget must be positive");
  if (learning_rate < 0.0) throw std::invalid_argument("TrainerConfig: negative learning rate");
  if (high_batch_transitions < 1) {
    throw std::invalid_argument("TrainerConfig: high_batch_transitions must be >= 1");
  }
  if (low_multiplier < 0) throw std::invalid_argument("TrainerConfig: negative low_multiplier");
  if (lf_only_multiplier < 1) {
    throw std::invalid_argument("TrainerConfig: lf_only_multiplier must be >= 1");
  }
  if (!(eta_ma > 0.0 && eta_ma < 1.0)) {
    throw std::invalid_argument("TrainerConfig: eta_ma outside (0, 1)");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("TrainerConfig: gamma outside [0, 1]");
  }
  if (eval_interval < 1) throw std::invalid_argument("TrainerConfig: eval_interval must be >= 1");
  if (eval_episodes < 1) throw std::invalid_argument("TrainerConfig: eval_episodes must be >= 1");
  if (reconstrain_period < 0) {
    throw std::invalid_argument("TrainerConfig: negative reconstrain_period");
  }
}

TrainMode parse_train_mode(const std::string& name) {
  if (name == "mfpg") return TrainMode::kMfpg;
  if (name == "hf-only") return TrainMode::kHfOnly;
  if (name == "lf-only") return TrainMode::kLfOnly;
  if (name == "mfpg-no-reparam") return TrainMode::kMfpgNoReparam;
  throw std::invalid_argument("unknown mode '" + name +
                              "' (expected mfpg|hf-only|lf-only|mfpg-no-reparam)");
}

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kMfpg: return "mfpg";
    case TrainMode::kHfOnly: return "hf-only";
    case TrainMode::kLfOnly: return "lf-only";
    case TrainMode::kMfpgNoReparam: return "mfpg-no-reparam";
  }
  return "?";
}

namespace {

Policy make_policy(const EnvSpec& spec, const std::vector<int>& hidden, Rng& rng) {
  if (spec.action.discrete) {
    return Policy(CategoricalPolicy::make(spec.obs_dim, hidden, spec.action.n, rng));
  }
  return Policy(GaussianPolicy::make(spec.obs_dim, hidden,
                                     static_cast<int>(spec.action.low.size()), rng));
}

/// One value-network regression pass: V(s_t) onto G_t over the given
/// trajectories, mean-squared loss scaled by vf_loss_weight.
double fit_value_network(ValueNetwork& vnet, AdamState& state,
                         const std::vector<const Trajectory*>& trajectories,
                         const TrainerConfig& cfg, Tape& tape) {
  tape.reset();
  MlpVars vars = register_mlp(tape, vnet.net);
  std::vector<Value> sq_errors;
  for (const Trajectory* traj : trajectories) {
    const std::vector<double> g = returns_to_go(traj->rewards, cfg.gamma);
    for (std::size_t t = 0; t < traj->length(); ++t) {
      Value v = vnet.predict_on(tape, vars, traj->states[t]);
      sq_errors.push_back(tape.square(tape.offset(v, -g[t])));
    }
  }
  if (sq_errors.empty()) return 0.0;
  Value loss = tape.scale(tape.mean_of(sq_errors), cfg.vf_loss_weight);
  const double loss_value = tape.value(loss);
  tape.backward(loss);
  std::vector<Tensor> grads = collect_gradients(tape, vnet.net, vars);
  if (cfg.learning_rate > 0.0) {
    adam_step(vnet.net.params, grads, state, cfg.learning_rate, cfg.max_grad_norm);
  }
  return loss_value;
}

}  // namespace

TrainResult train(const TrainerConfig& config, const MultiFidelityPair& proto, std::uint64_t seed) {
  config.validate();
  TrainResult result;
  MultiFidelityPair pair = proto.clone();
  RngStreams streams(seed);

  Policy policy = make_policy(pair.high->spec(), config.policy_hidden, streams.param_init);
  ValueNetwork vnet = ValueNetwork::make(pair.high->spec().obs_dim, config.value_hidden,
                                         streams.param_init);
  AdamState policy_opt = AdamState::like(policy.parameters());
  AdamState value_opt = AdamState::like(vnet.net.params);
  CvTracker tracker;
  tracker.eta_ma = config.eta_ma;

  const int horizon = pair.high->spec().horizon;
  const long batch_cap = static_cast<long>(config.high_batch_transitions) + horizon - 1;
  long consumed = 0;
  long next_eval = 0;
  long next_checkpoint = config.checkpoint_interval;
  std::uint64_t eval_index = 0;
  int iteration = 0;
  Tape tape;
  Tape value_tape;

  const bool is_mfpg = config.mode == TrainMode::kMfpg || config.mode == TrainMode::kMfpgNoReparam;
  SampleOptions sample_opts;
  sample_opts.share_noise = config.mode != TrainMode::kMfpgNoReparam;
  sample_opts.reconstrain_period = config.reconstrain_period;

  auto run_eval = [&]() {
    Rng eval_rng = streams.eval_stream(eval_index++);
    MultiFidelityPair eval_pair = pair.clone();  // training env state untouched
    EvalPoint p = evaluate(policy, *eval_pair.high, config.eval_episodes, eval_rng);
    p.step = consumed;
    result.curve.points.push_back(std::move(p));
  };
  auto save_checkpoint = [&]() {
    result.checkpoints.push_back({consumed, policy.parameters(), vnet.net.params});
  };

  run_eval();  // initial policy, step 0
  next_eval = config.eval_interval;

  while (consumed + batch_cap <= config.budget) {
    // --- sample per mode ----------------------------------------------------
    std::vector<CorrelatedPair> pairs;
    std::vector<Trajectory> high_only;
    std::vector<Trajectory> uncorrelated;
    std::vector<const Trajectory*> policy_batch;   // drives the REINFORCE loss
    std::vector<const Trajectory*> value_batch;    // drives the value fit
    long batch_high_steps = 0;

    if (is_mfpg) {
      pairs = sample_correlated_until(policy, pair, config.high_batch_transitions, streams,
                                      sample_opts);
      batch_high_steps = total_high_transitions(pairs);
      if (config.low_multiplier > 0) {
        uncorrelated = sample_uncorrelated_until(
            policy, *pair.low,
            static_cast<long>(config.high_batch_transitions) * config.low_multiplier,
            streams.low_init_state, streams.low_policy_noise, streams.low_transition);
      }
      for (const CorrelatedPair& cp : pairs) {
        policy_batch.push_back(&cp.high);
        value_batch.push_back(&cp.high);
      }
    } else if (config.mode == TrainMode::kHfOnly) {
      high_only = sample_high_only_until(policy, *pair.high, config.high_batch_transitions,
                                         streams);
      batch_high_steps = total_transitions(high_only);
      for (const Trajectory& t : high_only) {
        policy_batch.push_back(&t);
        value_batch.push_back(&t);
      }
    } else {  // lf-only: trains on low-fidelity data, budgeted per update as
              // if it had spent the high-fidelity batch.
      high_only = sample_uncorrelated_until(
          policy, *pair.low,
          static_cast<long>(config.high_batch_transitions) * config.lf_only_multiplier,
          streams.low_init_state, streams.low_policy_noise, streams.low_transition);
      batch_high_steps = config.high_batch_transitions;
      for (const Trajectory& t : high_only) {
        policy_batch.push_back(&t);
        value_batch.push_back(&t);
      }
    }

    // --- losses and statistics ----------------------------------------------
    tape.reset();
    MlpVars policy_vars = policy.register_on(tape);
    const ValueNetwork* baseline = config.use_baseline ? &vnet : nullptr;

    std::vector<TrajectoryLoss> x_high;
    x_high.reserve(policy_batch.size());
    for (const Trajectory* t : policy_batch) {
      x_high.push_back(trajectory_loss(tape, policy, policy_vars, baseline, *t, config.gamma,
                                       config.use_baseline));
    }

    IterationRecord rec;
    rec.iteration = iteration;
    std::vector<TrajectoryLoss> x_low_corr;
    Value mu_low;  // invalid unless the CV path is live
    SurrogateOptions surrogate_opts;

    if (is_mfpg) {
      x_low_corr.reserve(pairs.size());
      for (const CorrelatedPair& cp : pairs) {
        x_low_corr.push_back(trajectory_loss(tape, policy, policy_vars, baseline, cp.low,
                                             config.gamma, config.use_baseline));
      }
      std::vector<double> xh_scalars, xl_scalars;
      for (const TrajectoryLoss& x : x_high) xh_scalars.push_back(x.scalar);
      for (const TrajectoryLoss& x : x_low_corr) xl_scalars.push_back(x.scalar);
      const BatchStats batch = batch_statistics(xh_scalars, xl_scalars);
      ema_update(tracker, batch);
      rec.rho_batch = batch.rho;

      double c_star = config.force_cv_zero ? 0.0 : cv_coefficient(tracker);
      surrogate_opts.c_star = c_star;
      surrogate_opts.drop_negative_rho = config.drop_negative_rho;
      surrogate_opts.rho_batch = batch.rho;
      const bool cv_live = c_star != 0.0 &&
                           !(config.drop_negative_rho && batch.rho < 0.0) &&
                           !uncorrelated.empty();
      if (cv_live) {
        std::vector<TrajectoryLoss> x_low_uncorr;
        x_low_uncorr.reserve(uncorrelated.size());
        for (const Trajectory& t : uncorrelated) {
          x_low_uncorr.push_back(trajectory_loss(tape, policy, policy_vars, baseline, t,
                                                 config.gamma, config.use_baseline));
        }
        mu_low = low_fidelity_mean(tape, x_low_uncorr);
      }
      rec.cv_active = cv_live;
    }

    Value surrogate = mfpg_surrogate(tape, x_high, x_low_corr, mu_low, surrogate_opts);
    rec.c_star = surrogate_opts.c_star;
    rec.rho_ema = tracker.rho;
    rec.s_high_ema = tracker.s_high;
    rec.s_low_ema = tracker.s_low;
    rec.surrogate = tape.value(surrogate);
    double hf_scalar_sum = 0.0;
    for (const TrajectoryLoss& x : x_high) hf_scalar_sum += x.scalar;
    rec.hf_only_scalar = hf_scalar_sum / static_cast<double>(x_high.size());

    if (!std::isfinite(rec.surrogate)) {
      rec.hf_steps_consumed = consumed;
      result.records.push_back(rec);
      result.aborted = true;
      result.abort_reason = "non-finite surrogate loss at iteration " + std::to_string(iteration);
      break;
    }

    // --- ascend: Adam on the negated surrogate --------------------------------
    tape.backward(tape.scale(surrogate, -1.0));
    std::vector<Tensor> grads = policy.gradients(tape, policy_vars);
    if (config.learning_rate > 0.0) {
      adam_step(policy.parameters(), grads, policy_opt, config.learning_rate,
                config.max_grad_norm);
    }

    if (config.use_baseline) {
      rec.vf_loss = fit_value_network(vnet, value_opt, value_batch, config, value_tape);
    }

    consumed += batch_high_steps;
    iteration += 1;
    rec.hf_steps_consumed = consumed;
    result.records.push_back(rec);

    if (config.checkpoint_interval > 0 && consumed >= next_checkpoint) {
      save_checkpoint();
      next_checkpoint = (consumed / config.checkpoint_interval + 1) * config.checkpoint_interval;
    }
    if (consumed >= next_eval) {
      run_eval();
      next_eval = (consumed / config.eval_interval + 1) * config.eval_interval;
    }
  }

  result.hf_steps_consumed = consumed;
  result.policy = std::move(policy);
  result.valuenet = std::move(vnet);
  return result;
}

}  // namespace mfpg
