#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace qpkc::harness {

namespace {

// Runs fn(0..count) on a small pool; work items are independent and write
// only to their own slot, so scheduling order cannot change a report.
void parallel_for(std::int64_t count,
                  const std::function<void(std::int64_t)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const auto workers =
      static_cast<std::int64_t>(std::max(1u, hw == 0 ? 4u : hw));
  if (workers == 1 || count < 2) {
    for (std::int64_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) {
        break;
      }
      try {
        fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(std::min(workers, count)));
  for (std::int64_t w = 0; w < std::min(workers, count); ++w) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

std::string format_double(double value, std::optional<int> round_dp) {
  char buffer[64];
  if (round_dp) {
    std::snprintf(buffer, sizeof(buffer), "%.*f", *round_dp, value);
  } else {
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  }
  return buffer;
}

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) {
    return value;
  }
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') {
      quoted += '"';
    }
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) {
    return -1.0;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  return sum / static_cast<double>(values.size());
}

double eve_accuracy(const proto::SessionOutcome& outcome) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < outcome.message.size(); ++i) {
    correct += (outcome.eve_recovered_bits[i].bit == outcome.message[i]);
  }
  return static_cast<double>(correct) /
         static_cast<double>(outcome.message.size());
}

}  // namespace

std::string format_cell(const Cell& cell, std::optional<int> round_dp) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    return std::to_string(*i);
  }
  if (const auto* d = std::get_if<double>(&cell)) {
    return format_double(*d, round_dp);
  }
  return std::get<std::string>(cell);
}

void write_csv(const Report& report, std::ostream& out,
               std::optional<int> round_dp) {
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    out << (c ? "," : "") << csv_escape(report.columns[c]);
  }
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << csv_escape(format_cell(row[c], round_dp));
    }
    out << '\n';
  }
}

void write_json(const Report& report, std::ostream& out,
                std::optional<int> round_dp) {
  nlohmann::json array = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json object = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Cell& cell = row[c];
      if (const auto* i = std::get_if<std::int64_t>(&cell)) {
        object[report.columns[c]] = *i;
      } else if (const auto* d = std::get_if<double>(&cell)) {
        object[report.columns[c]] =
            round_dp ? std::round(*d * std::pow(10.0, *round_dp)) /
                           std::pow(10.0, *round_dp)
                     : *d;
      } else {
        object[report.columns[c]] = std::get<std::string>(cell);
      }
    }
    array.push_back(std::move(object));
  }
  out << array.dump(2) << '\n';
}

void write_report(const Report& report, const std::string& path, Format format,
                  std::optional<int> round_dp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open output file: " + path);
  }
  if (format == Format::Csv) {
    write_csv(report, out, round_dp);
  } else {
    write_json(report, out, round_dp);
  }
  out.flush();
  if (!out) {
    throw IoError("write failed: " + path);
  }
}

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(std::move(cell));
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(std::move(cell));
    rows.push_back(std::move(cells));
  }
  return rows;
}

Report cmd_table1(const Table1Config& config) {
  if (config.k_values.empty()) {
    throw std::invalid_argument("table1: K list must be nonempty");
  }
  Report report;
  report.columns = {"K", "F", "I_AE", "I_AE_clamped", "P_e"};
  for (const auto& row : gmn::table_rows(config.k_values, config.mode)) {
    report.rows.push_back({row.copies, row.fidelity, row.information,
                           row.information_clamped, row.error_probability});
  }
  return report;
}

Report cmd_session(const SessionCommandConfig& config) {
  if (config.trials < 1) {
    throw std::invalid_argument("session: trials must be positive");
  }
  config.session.validate();
  config.adversary.validate();

  std::vector<proto::SessionOutcome> outcomes(
      static_cast<std::size_t>(config.trials));
  parallel_for(config.trials, [&](std::int64_t trial) {
    proto::SessionConfig session = config.session;
    session.seed = stream_seed(config.seed, static_cast<std::uint64_t>(trial));
    outcomes[static_cast<std::size_t>(trial)] =
        proto::run_session(session, config.adversary);
  });

  Report report;
  report.columns = {"trial",         "aborted",        "abort_stage",
                    "decoy_err_keygen", "decoy_err_issue", "recycle_err",
                    "msg_ok",        "digest_ok",      "eve_bit_accuracy",
                    "mean_bell_fidelity"};

  std::int64_t aborted_count = 0;
  std::vector<double> keygen_rates;
  std::vector<double> issue_rates;
  std::vector<double> recycle_rates;
  std::vector<double> msg_oks;
  std::vector<double> digest_oks;
  std::vector<double> accuracies;
  std::vector<double> fidelities;

  for (std::int64_t trial = 0; trial < config.trials; ++trial) {
    const auto& outcome = outcomes[static_cast<std::size_t>(trial)];
    const bool delivered = outcome.delivered();
    const double keygen_rate = outcome.decoy_error_rate_keygen.value_or(-1.0);
    const double issue_rate = outcome.decoy_error_rate_issue.value_or(-1.0);
    const double recycle_rate = outcome.recycle_error_rate.value_or(-1.0);
    const double msg_ok =
        delivered ? (outcome.recovered_message == outcome.message ? 1.0 : 0.0)
                  : -1.0;
    const double digest_ok =
        outcome.digest_ok ? (*outcome.digest_ok ? 1.0 : 0.0) : -1.0;
    const double accuracy = delivered ? eve_accuracy(outcome) : -1.0;
    const double fidelity =
        delivered ? mean_of(outcome.post_decrypt_bell_fidelities) : -1.0;

    aborted_count += outcome.aborted;
    if (keygen_rate >= 0.0) keygen_rates.push_back(keygen_rate);
    if (issue_rate >= 0.0) issue_rates.push_back(issue_rate);
    if (recycle_rate >= 0.0) recycle_rates.push_back(recycle_rate);
    if (msg_ok >= 0.0) msg_oks.push_back(msg_ok);
    if (digest_ok >= 0.0) digest_oks.push_back(digest_ok);
    if (accuracy >= 0.0) accuracies.push_back(accuracy);
    if (fidelity >= 0.0) fidelities.push_back(fidelity);

    report.rows.push_back(
        {trial, static_cast<std::int64_t>(outcome.aborted ? 1 : 0),
         std::string(outcome.aborted ? outcome.abort_stage : "none"),
         keygen_rate, issue_rate, recycle_rate, msg_ok, digest_ok, accuracy,
         fidelity});
  }

  report.rows.push_back(
      {std::int64_t{-1},
       static_cast<double>(aborted_count) / static_cast<double>(config.trials),
       std::string("aggregate"), mean_of(keygen_rates), mean_of(issue_rates),
       mean_of(recycle_rates), mean_of(msg_oks), mean_of(digest_oks),
       mean_of(accuracies), mean_of(fidelities)});
  return report;
}

Report cmd_sweep(const SweepConfig& config) {
  if (config.fractions.empty()) {
    throw std::invalid_argument("sweep: fraction grid must be nonempty");
  }
  for (double f : config.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("sweep: fractions must lie in [0, 1]");
    }
  }
  if (config.trials_per_point < 1) {
    throw std::invalid_argument("sweep: trials must be positive");
  }
  config.session.validate();

  Report report;
  report.columns = {"fraction", "sessions", "abort_probability",
                    "eve_mean_accuracy", "mean_decoy_error_rate"};

  for (std::size_t point = 0; point < config.fractions.size(); ++point) {
    proto::AdversaryStrategy adversary;
    adversary.kind = config.adversary;
    adversary.attack_fraction = config.fractions[point];
    adversary.flip_probability = config.flip_probability;
    adversary.validate();

    const std::uint64_t point_seed =
        stream_seed(config.seed, static_cast<std::uint64_t>(point));
    std::vector<proto::SessionOutcome> outcomes(
        static_cast<std::size_t>(config.trials_per_point));
    parallel_for(config.trials_per_point, [&](std::int64_t trial) {
      proto::SessionConfig session = config.session;
      session.seed = stream_seed(point_seed, static_cast<std::uint64_t>(trial));
      outcomes[static_cast<std::size_t>(trial)] =
          proto::run_session(session, adversary);
    });

    std::int64_t aborted = 0;
    std::vector<double> accuracies;
    std::vector<double> decoy_rates;
    for (const auto& outcome : outcomes) {
      aborted += outcome.aborted;
      if (outcome.delivered()) {
        accuracies.push_back(eve_accuracy(outcome));
      }
      if (outcome.decoy_error_rate_keygen) {
        decoy_rates.push_back(*outcome.decoy_error_rate_keygen);
      }
    }
    report.rows.push_back(
        {config.fractions[point], config.trials_per_point,
         static_cast<double>(aborted) /
             static_cast<double>(config.trials_per_point),
         mean_of(accuracies), mean_of(decoy_rates)});
  }
  return report;
}

Report cmd_estimate_sim(const EstimateSimConfig& config) {
  if (config.trials < 1) {
    throw std::invalid_argument("estimate-sim: trials must be positive");
  }
  if (config.message_length < 1) {
    throw std::invalid_argument("estimate-sim: message length must be positive");
  }

  // A fixed chunk count keeps the report independent of the worker count.
  const std::int64_t chunks = std::min<std::int64_t>(config.trials, 64);
  Rng message_rng = Rng::for_stream(config.seed, 0);
  std::vector<int> message(static_cast<std::size_t>(config.message_length));
  for (auto& b : message) {
    b = message_rng.bit();
  }

  std::vector<gmn::AttackReport> partial(static_cast<std::size_t>(chunks));
  parallel_for(chunks, [&](std::int64_t chunk) {
    gmn::AttackSimConfig sim;
    sim.resolution_bits = config.resolution_bits;
    sim.copies = config.copies;
    sim.message = message;
    sim.trials = config.trials / chunks + (chunk < config.trials % chunks);
    sim.fidelity_override = config.fidelity_override;
    Rng rng = Rng::for_stream(config.seed, static_cast<std::uint64_t>(chunk) + 1);
    partial[static_cast<std::size_t>(chunk)] =
        gmn::simulate_state_estimation_attack(sim, rng);
  });

  std::int64_t samples = 0;
  std::int64_t eve_correct = 0;
  std::int64_t bob_errors = 0;
  for (const auto& part : partial) {
    samples += part.trials;
    eve_correct += std::llround(*part.empirical_eve_accuracy *
                                static_cast<double>(part.trials));
    bob_errors += std::llround(*part.empirical_error_rate *
                               static_cast<double>(part.trials));
  }

  const double fidelity = config.fidelity_override
                              ? *config.fidelity_override
                              : gmn::optimal_fidelity_approx(config.copies);
  Report report;
  report.columns = {"K",           "F_theory",      "Pe_theory",
                    "Pe_empirical", "EveAcc_theory", "EveAcc_empirical",
                    "trials"};
  report.rows.push_back(
      {config.copies, fidelity, gmn::error_probability(fidelity),
       static_cast<double>(bob_errors) / static_cast<double>(samples),
       fidelity,
       static_cast<double>(eve_correct) / static_cast<double>(samples),
       config.trials});
  return report;
}

std::vector<double> parse_fraction_grid(const std::string& spec) {
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;
  char tail = '\0';
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf%c", &start, &stop, &step, &tail) !=
      3) {
    throw std::invalid_argument(
        "fraction grid must be start:stop:step, e.g. 0:1:0.1");
  }
  if (step <= 0.0 || stop < start || start < 0.0 || stop > 1.0) {
    throw std::invalid_argument(
        "fraction grid must satisfy 0 <= start <= stop <= 1 and step > 0");
  }
  const auto count =
      static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = std::min(start + static_cast<double>(i) * step, stop);
  }
  return grid;
}

proto::AdversaryKind parse_adversary_name(const std::string& name) {
  if (name == "none") return proto::AdversaryKind::None;
  if (name == "intercept") return proto::AdversaryKind::InterceptResendRandomBasis;
  if (name == "entangle") return proto::AdversaryKind::EntangleCnotAncilla;
  if (name == "dos") return proto::AdversaryKind::DosFlip;
  throw std::invalid_argument("unknown adversary '" + name +
                              "'; valid names: none, intercept, entangle, dos");
}

}  // namespace qpkc::harness
