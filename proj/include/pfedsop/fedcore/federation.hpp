#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pfedsop/fedcore/hyperparams.hpp"
#include "pfedsop/metrics/metrics.hpp"
#include "pfedsop/models/batch.hpp"
#include "pfedsop/models/objective.hpp"
#include "pfedsop/numkit/rng.hpp"
#include "pfedsop/numkit/vector.hpp"

namespace pfedsop::fedcore {

using models::Batch;
using numkit::ParamVector;

/// A client's local train/test rows.
struct ClientData {
  Batch train;
  Batch test;
};

struct ClientState {
  std::size_t id = 0;
  /// Persistent model. For pFedSOP this is the personalized x_i; for the
  /// no-PC ablation the client's own post-SGD model; unused by the global
  /// baselines.
  ParamVector x;
  /// Latest local gradient update; present iff the client has participated.
  std::optional<ParamVector> last_delta;
  std::optional<std::size_t> last_round_seen;
};

struct ServerState {
  ParamVector x_init;
  /// Global model of FedAvg/FedProx-style methods (starts at x_init).
  ParamVector x_global;
  /// Mean of the last completed round's fresh local updates.
  std::optional<ParamVector> global_delta;
  std::size_t round = 0;
};

/// Everything a run needs besides the hyperparameters.
struct Federation {
  std::shared_ptr<const models::Objective> objective;
  std::vector<ClientData> clients;

  std::size_t client_count() const noexcept { return clients.size(); }
};

struct RunOptions {
  /// Worker threads for per-client work inside a round; 0 picks
  /// hardware_concurrency. Results do not depend on this value.
  std::size_t threads = 1;
};

/// K' = round(fraction * K) distinct ids, sorted ascending, drawn uniformly
/// without replacement from the (seed, round) server stream.
std::vector<std::size_t> sample_clients(std::size_t clients, double fraction, std::size_t round,
                                        std::uint64_t seed);

/// Mean loss over the batch and its gradient (written into grad).
using GradientFn =
    std::function<double(const ParamVector& params, const Batch& batch, ParamVector& grad)>;
/// Called once per SGD step with the step index (from 0) and its gradient.
using StepObserver = std::function<void(std::size_t step, const ParamVector& grad)>;

struct LocalUpdate {
  ParamVector delta;    // (x_start - x_final) / eta2
  ParamVector x_final;  // end of the SGD probe
  double mean_loss = 0.0;  // mean of first-epoch batch losses
  std::size_t steps = 0;
};

/// Batches drawn by local SGD for one epoch: a shuffled permutation of
/// [0, n) cut into batch_size chunks, last short chunk kept.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    numkit::RngStream& rng);

Batch select_rows(const Batch& data, std::span<const std::size_t> rows);

/// local_epochs passes of mini-batch SGD from x_start using `grad_fn`.
LocalUpdate run_local_sgd(const GradientFn& grad_fn, const ParamVector& x_start,
                          const Batch& train, double eta2, std::size_t local_epochs,
                          std::size_t batch_size, numkit::RngStream& rng,
                          const StepObserver& observer = {});

/// Plain local SGD on the objective with h.eta2, h.local_epochs, h.batch_size.
LocalUpdate local_gradient_update(const models::Objective& objective, const ParamVector& x_start,
                                  const Batch& train, const HyperParams& h, numkit::RngStream& rng,
                                  const StepObserver& observer = {});

/// Arithmetic mean. Throws ProtocolError when empty, DimensionError on
/// mismatched lengths.
ParamVector aggregate_updates(std::span<const ParamVector> deltas);

/// Fresh server and client states for a federation.
ServerState make_server_state(const Federation& fed, const HyperParams& h);
std::vector<ClientState> make_client_states(const Federation& fed);

/// One communication round for h.method. Mutates server and client state
/// and returns the sampled clients' metrics.
metrics::RoundMetrics run_round(ServerState& server, std::vector<ClientState>& clients,
                                const Federation& fed, const HyperParams& h,
                                const RunOptions& options = {});

struct ExperimentResult {
  std::vector<metrics::RoundMetrics> rounds;
  metrics::BestAccuracyTable best;
  ServerState server;
  std::vector<ClientState> clients;
};

/// h.rounds rounds from fresh state. Any NaN loss or non-finite update
/// aborts with an Error naming the round and client.
ExperimentResult run_experiment(const Federation& fed, const HyperParams& h,
                                const RunOptions& options = {});

}  // namespace pfedsop::fedcore
