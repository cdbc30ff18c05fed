#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pfedsop::metrics {

struct ClientRoundResult {
  std::size_t client_id = 0;
  double train_loss = 0.0;
  double test_accuracy = 0.0;
  // Present only when personalization ran for the client this round.
  std::optional<double> theta;
  std::optional<double> beta;

  friend bool operator==(const ClientRoundResult&, const ClientRoundResult&) = default;
};

struct RoundMetrics {
  std::size_t round = 0;
  std::vector<std::size_t> sampled_ids;
  std::vector<ClientRoundResult> per_client;
  double avg_train_loss = 0.0;
  double avg_test_accuracy = 0.0;
};

/// Builds a RoundMetrics with averages over the given clients. Throws
/// ProtocolError for an empty round and DataError on any NaN.
RoundMetrics record_round(std::size_t round, std::vector<ClientRoundResult> results);

/// Highest test accuracy each client reached in the rounds it was sampled.
class BestAccuracyTable {
 public:
  void update(const RoundMetrics& round);

  const std::map<std::size_t, double>& per_client() const noexcept { return best_; }
  std::optional<double> best(std::size_t client_id) const;
  /// Mean over clients present in the table; 0 when empty.
  double overall() const;
  bool empty() const noexcept { return best_.empty(); }

  friend bool operator==(const BestAccuracyTable&, const BestAccuracyTable&) = default;

 private:
  std::map<std::size_t, double> best_;
};

BestAccuracyTable update_best_table(BestAccuracyTable table, const RoundMetrics& round);

/// Fixed 6-decimal rendering used by every CSV writer.
std::string format_fixed(double value);

/// `round,client_id,train_loss,test_accuracy,theta,beta`
std::string metrics_csv(const std::vector<RoundMetrics>& rounds);
/// `round,avg_train_loss,avg_test_accuracy`
std::string summary_csv(const std::vector<RoundMetrics>& rounds);
/// `client_id,best_accuracy`, then a final `__overall__` row.
std::string best_table_csv(const BestAccuracyTable& table);

/// Reads a metrics CSV back into per-round records (averages recomputed).
/// Throws FormatError on malformed input.
std::vector<RoundMetrics> parse_metrics_csv(std::string_view text);

}  // namespace pfedsop::metrics
