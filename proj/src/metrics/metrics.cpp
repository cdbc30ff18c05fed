#include "pfedsop/metrics/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "pfedsop/error.hpp"

namespace pfedsop::metrics {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view cell, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError("bad number '" + std::string(cell) + "'", line);
  }
  return value;
}

std::optional<double> parse_optional(std::string_view cell, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  return parse_number<double>(cell, line);
}

}  // namespace

RoundMetrics record_round(std::size_t round, std::vector<ClientRoundResult> results) {
  if (results.empty()) throw ProtocolError("record_round: no sampled clients in round " +
                                           std::to_string(round));
  RoundMetrics m;
  m.round = round;
  double loss_sum = 0.0;
  double acc_sum = 0.0;
  for (const auto& r : results) {
    const bool nan = std::isnan(r.train_loss) || std::isnan(r.test_accuracy) ||
                     (r.theta && std::isnan(*r.theta)) || (r.beta && std::isnan(*r.beta));
    if (nan) {
      throw DataError("record_round: NaN metric for client " + std::to_string(r.client_id) +
                      " in round " + std::to_string(round));
    }
    m.sampled_ids.push_back(r.client_id);
    loss_sum += r.train_loss;
    acc_sum += r.test_accuracy;
  }
  const auto n = static_cast<double>(results.size());
  m.avg_train_loss = loss_sum / n;
  m.avg_test_accuracy = acc_sum / n;
  m.per_client = std::move(results);
  return m;
}

void BestAccuracyTable::update(const RoundMetrics& round) {
  for (const auto& r : round.per_client) {
    auto [it, inserted] = best_.try_emplace(r.client_id, r.test_accuracy);
    if (!inserted) it->second = std::max(it->second, r.test_accuracy);
  }
}

std::optional<double> BestAccuracyTable::best(std::size_t client_id) const {
  const auto it = best_.find(client_id);
  if (it == best_.end()) return std::nullopt;
  return it->second;
}

double BestAccuracyTable::overall() const {
  if (best_.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [id, acc] : best_) sum += acc;
  return sum / static_cast<double>(best_.size());
}

BestAccuracyTable update_best_table(BestAccuracyTable table, const RoundMetrics& round) {
  table.update(round);
  return table;
}

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string s = buf;
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

std::string metrics_csv(const std::vector<RoundMetrics>& rounds) {
  std::string out = "round,client_id,train_loss,test_accuracy,theta,beta\n";
  for (const auto& m : rounds) {
    for (const auto& r : m.per_client) {
      out += std::to_string(m.round);
      out += ',';
      out += std::to_string(r.client_id);
      out += ',';
      out += format_fixed(r.train_loss);
      out += ',';
      out += format_fixed(r.test_accuracy);
      out += ',';
      if (r.theta) out += format_fixed(*r.theta);
      out += ',';
      if (r.beta) out += format_fixed(*r.beta);
      out += '\n';
    }
  }
  return out;
}

std::string summary_csv(const std::vector<RoundMetrics>& rounds) {
  std::string out = "round,avg_train_loss,avg_test_accuracy\n";
  for (const auto& m : rounds) {
    out += std::to_string(m.round) + ',' + format_fixed(m.avg_train_loss) + ',' +
           format_fixed(m.avg_test_accuracy) + '\n';
  }
  return out;
}

std::string best_table_csv(const BestAccuracyTable& table) {
  std::string out = "client_id,best_accuracy\n";
  for (const auto& [id, acc] : table.per_client()) {
    out += std::to_string(id) + ',' + format_fixed(acc) + '\n';
  }
  out += "__overall__," + format_fixed(table.overall()) + '\n';
  return out;
}

std::vector<RoundMetrics> parse_metrics_csv(std::string_view text) {
  std::vector<RoundMetrics> rounds;
  std::vector<ClientRoundResult> pending;
  std::optional<std::size_t> current;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (current) rounds.push_back(record_round(*current, std::move(pending)));
    pending.clear();
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != "round,client_id,train_loss,test_accuracy,theta,beta") {
        throw FormatError("unexpected metrics header", line_no);
      }
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 6) throw FormatError("expected 6 fields", line_no);
    const auto round = parse_number<std::size_t>(cells[0], line_no);
    if (!current || *current != round) {
      flush();
      current = round;
    }
    ClientRoundResult r;
    r.client_id = parse_number<std::size_t>(cells[1], line_no);
    r.train_loss = parse_number<double>(cells[2], line_no);
    r.test_accuracy = parse_number<double>(cells[3], line_no);
    r.theta = parse_optional(cells[4], line_no);
    r.beta = parse_optional(cells[5], line_no);
    pending.push_back(r);
  }
  flush();
  return rounds;
}

}  // namespace pfedsop::metrics
