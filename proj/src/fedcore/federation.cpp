#include "pfedsop/fedcore/federation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include "pfedsop/baselines/baselines.hpp"
#include "pfedsop/core/personalization.hpp"
#include "pfedsop/error.hpp"

namespace pfedsop::fedcore {
namespace {

using numkit::RngStream;
using numkit::StreamDomain;

// Result of one client's step (2)-(3) of a round, before the barrier.
struct ClientWork {
  ParamVector delta;
  metrics::ClientRoundResult result;
  ParamVector next_x;
  bool keep_x = false;
};

// Runs fn(slot) for slot in [0, count) on up to `threads` workers. Every
// slot writes only its own output, so scheduling cannot change results.
// The first failing slot's exception (lowest index) is rethrown.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t slot) {
    try {
      fn(slot);
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_finite(const LocalUpdate& update, std::size_t round, std::size_t client) {
  if (std::isnan(update.mean_loss) || !numkit::all_finite(update.delta)) {
    throw Error("non-finite training result in round " + std::to_string(round) + " for client " +
                std::to_string(client) + " (loss " + std::to_string(update.mean_loss) + ")");
  }
}

double evaluate_accuracy(const models::Objective& objective, const ParamVector& x,
                         const ClientData& data) {
  return objective.evaluate(x, data.test).accuracy;
}

ClientWork pfedsop_client(const ServerState& server, const ClientState& client,
                          const ClientData& data, const models::Objective& objective,
                          const HyperParams& h, std::size_t round) {
  ClientWork work;
  work.result.client_id = client.id;
  ParamVector x;
  if (!client.last_delta) {
    x = server.x_init;
  } else {
    if (!server.global_delta) {
      throw ProtocolError("returning client " + std::to_string(client.id) +
                          " but no global update has been broadcast");
    }
    auto personalized = core::personalize_model(client.x, *client.last_delta,
                                                *server.global_delta, h);
    x = std::move(personalized.x);
    work.result.theta = personalized.report.theta;
    work.result.beta = personalized.report.beta;
  }

  RngStream rng(h.seed, {StreamDomain::kClientSgd, client.id, round});
  auto update = local_gradient_update(objective, x, data.train, h, rng);
  check_finite(update, round, client.id);
  work.result.train_loss = update.mean_loss;
  work.result.test_accuracy = evaluate_accuracy(
      objective, h.eval_point == EvalPoint::kPersonalized ? x : update.x_final, data);
  work.delta = std::move(update.delta);
  work.next_x = std::move(x);
  work.keep_x = true;
  return work;
}

// Ablation: no personalization component. The client keeps training its own
// model from where its last SGD probe ended.
ClientWork no_pc_client(const ServerState& server, const ClientState& client,
                        const ClientData& data, const models::Objective& objective,
                        const HyperParams& h, std::size_t round) {
  ClientWork work;
  work.result.client_id = client.id;
  const ParamVector& x = client.last_delta ? client.x : server.x_init;

  RngStream rng(h.seed, {StreamDomain::kClientSgd, client.id, round});
  auto update = local_gradient_update(objective, x, data.train, h, rng);
  check_finite(update, round, client.id);
  work.result.train_loss = update.mean_loss;
  work.result.test_accuracy = evaluate_accuracy(
      objective, h.eval_point == EvalPoint::kPersonalized ? x : update.x_final, data);
  work.delta = std::move(update.delta);
  work.next_x = std::move(update.x_final);
  work.keep_x = true;
  return work;
}

ClientWork global_client(const ServerState& server, const ClientState& client,
                         const ClientData& data, const models::Objective& objective,
                         const HyperParams& h, std::size_t round) {
  ClientWork work;
  work.result.client_id = client.id;
  if (baselines::is_fine_tuned(h.method)) {
    RngStream ft_rng(h.seed, {StreamDomain::kFineTune, client.id, round});
    work.result.test_accuracy =
        baselines::fine_tune_then_eval(objective, server.x_global, data, h.ft_epochs, h, ft_rng)
            .accuracy;
  } else {
    work.result.test_accuracy = evaluate_accuracy(objective, server.x_global, data);
  }
  RngStream rng(h.seed, {StreamDomain::kClientSgd, client.id, round});
  auto update = baselines::fedavg_client_step(objective, server.x_global, data.train, h, rng);
  check_finite(update, round, client.id);
  work.result.train_loss = update.mean_loss;
  work.delta = std::move(update.delta);
  return work;
}

}  // namespace

std::vector<std::size_t> sample_clients(std::size_t clients, double fraction, std::size_t round,
                                        std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ParameterError("sample_clients: fraction must be in (0, 1]");
  }
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(clients)));
  if (k < 1 || k > clients) {
    throw ParameterError("sample_clients: round(" + std::to_string(fraction) + " * " +
                         std::to_string(clients) + ") selects no clients");
  }
  std::vector<std::size_t> ids(clients);
  std::iota(ids.begin(), ids.end(), 0);
  RngStream rng(seed, {StreamDomain::kServer, 0, round});
  // Partial Fisher-Yates: the first k slots are a uniform k-subset.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(clients - i);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    RngStream& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

Batch select_rows(const Batch& data, std::span<const std::size_t> rows) {
  Batch out;
  out.inputs = models::Matrix(rows.size(), data.inputs.cols);
  out.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = data.inputs.row(rows[i]);
    std::copy(src.begin(), src.end(), out.inputs.row(i).begin());
    out.labels[i] = data.labels[rows[i]];
  }
  return out;
}

LocalUpdate run_local_sgd(const GradientFn& grad_fn, const ParamVector& x_start,
                          const Batch& train, double eta2, std::size_t local_epochs,
                          std::size_t batch_size, RngStream& rng, const StepObserver& observer) {
  if (train.size() == 0) throw DataError("local SGD: empty training set");
  if (!(eta2 > 0.0)) throw ParameterError("local SGD: eta2 must be > 0");
  if (local_epochs == 0 || batch_size == 0) {
    throw ParameterError("local SGD: local_epochs and batch_size must be >= 1");
  }

  LocalUpdate out;
  out.x_final = x_start;
  ParamVector grad;
  double first_epoch_loss = 0.0;
  std::size_t first_epoch_batches = 0;
  for (std::size_t epoch = 0; epoch < local_epochs; ++epoch) {
    for (const auto& rows : epoch_batches(train.size(), batch_size, rng)) {
      const Batch batch = select_rows(train, rows);
      const double loss = grad_fn(out.x_final, batch, grad);
      if (epoch == 0) {
        first_epoch_loss += loss;
        ++first_epoch_batches;
      }
      if (observer) observer(out.steps, grad);
      numkit::axpy(-eta2, grad, out.x_final);
      ++out.steps;
    }
  }
  out.mean_loss = first_epoch_loss / static_cast<double>(first_epoch_batches);
  out.delta = numkit::subtract(x_start, out.x_final);
  numkit::scale_in_place(out.delta, 1.0 / eta2);
  return out;
}

LocalUpdate local_gradient_update(const models::Objective& objective, const ParamVector& x_start,
                                  const Batch& train, const HyperParams& h, RngStream& rng,
                                  const StepObserver& observer) {
  const GradientFn fn = [&objective](const ParamVector& p, const Batch& b, ParamVector& g) {
    return objective.loss_and_gradient(p, b, g);
  };
  return run_local_sgd(fn, x_start, train, h.eta2, h.local_epochs, h.batch_size, rng, observer);
}

ParamVector aggregate_updates(std::span<const ParamVector> deltas) {
  if (deltas.empty()) throw ProtocolError("aggregate_updates: no updates to aggregate");
  ParamVector sum(deltas.front().size());
  for (const auto& d : deltas) {
    if (d.size() != sum.size()) throw DimensionError("aggregate_updates: length mismatch");
    numkit::axpy(1.0, d, sum);
  }
  if (deltas.size() > 1) scale_in_place(sum, 1.0 / static_cast<double>(deltas.size()));
  return sum;
}

ServerState make_server_state(const Federation& fed, const HyperParams& h) {
  if (!fed.objective) throw ContractError("federation has no objective");
  RngStream rng(h.seed, {StreamDomain::kInit, 0, 0});
  ServerState server;
  server.x_init = fed.objective->initial_params(rng);
  server.x_global = server.x_init;
  return server;
}

std::vector<ClientState> make_client_states(const Federation& fed) {
  std::vector<ClientState> clients(fed.client_count());
  for (std::size_t i = 0; i < clients.size(); ++i) clients[i].id = i;
  return clients;
}

metrics::RoundMetrics run_round(ServerState& server, std::vector<ClientState>& clients,
                                const Federation& fed, const HyperParams& h,
                                const RunOptions& options) {
  if (clients.size() != fed.client_count()) {
    throw ContractError("run_round: client states do not match the federation");
  }
  const std::size_t round = server.round + 1;
  const auto sampled = sample_clients(clients.size(), h.participation_fraction, round, h.seed);
  const auto& objective = *fed.objective;

  std::vector<ClientWork> work(sampled.size());
  parallel_for(sampled.size(), options.threads, [&](std::size_t slot) {
    const std::size_t id = sampled[slot];
    const ClientState& client = clients[id];
    const ClientData& data = fed.clients[id];
    switch (h.method) {
      case Method::kPfedsop:
        work[slot] = pfedsop_client(server, client, data, objective, h, round);
        break;
      case Method::kPfedsopNoPc:
        work[slot] = no_pc_client(server, client, data, objective, h, round);
        break;
      default:
        work[slot] = global_client(server, client, data, objective, h, round);
        break;
    }
  });

  // Barrier: commit client state and aggregate in sampled-id order.
  std::vector<ParamVector> fresh;
  std::vector<metrics::ClientRoundResult> results;
  fresh.reserve(work.size());
  for (std::size_t slot = 0; slot < work.size(); ++slot) {
    ClientState& client = clients[sampled[slot]];
    if (work[slot].keep_x) client.x = std::move(work[slot].next_x);
    client.last_delta = work[slot].delta;
    client.last_round_seen = round;
    fresh.push_back(std::move(work[slot].delta));
    results.push_back(work[slot].result);
  }
  server.global_delta = aggregate_updates(fresh);
  if (baselines::is_global_method(h.method)) {
    server.x_global = baselines::fedavg_server_update(server.x_global, *server.global_delta, h.eta2);
  }
  server.round = round;
  return metrics::record_round(round, std::move(results));
}

ExperimentResult run_experiment(const Federation& fed, const HyperParams& h,
                                const RunOptions& options) {
  validate(h);
  if (fed.client_count() == 0) throw ParameterError("run_experiment: no clients");
  ExperimentResult result;
  result.server = make_server_state(fed, h);
  result.clients = make_client_states(fed);
  for (std::size_t t = 0; t < h.rounds; ++t) {
    auto round = run_round(result.server, result.clients, fed, h, options);
    result.best.update(round);
    result.rounds.push_back(std::move(round));
  }
  return result;
}

}  // namespace pfedsop::fedcore
