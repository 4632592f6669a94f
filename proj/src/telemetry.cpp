#include "tradeslab/telemetry.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace tradeslab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void write_epochs_csv(const std::vector<EpochTelemetry>& epochs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_epochs_csv: cannot open " + path);
  out << kEpochsCsvHeader << '\n';
  for (const auto& e : epochs) {
    out << e.epoch << ',' << fmt(e.lr) << ',' << fmt(e.clean_train_acc) << ','
        << fmt(e.adv_train_acc) << ',' << fmt(e.gap) << ',' << fmt(e.clean_val_acc) << ','
        << fmt(e.pgd_val_acc) << ',' << fmt(e.fosc_mean) << ',' << fmt(e.sgcs_mean) << ','
        << fmt(e.w_grad_norm_mean) << ',' << fmt(e.ce_norm_mean) << ','
        << fmt(e.kl_norm_mean) << ',' << fmt(e.grad_cos_mean) << ','
        << (e.guard_triggered ? 1 : 0) << ',' << e.noise_batches_applied << '\n';
  }
}

void write_batches_jsonl(const std::vector<EpochTelemetry>& epochs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_batches_jsonl: cannot open " + path);
  for (const auto& e : epochs) {
    for (const auto& b : e.batches) {
      nlohmann::json row = {{"step", b.step},
                            {"w_grad_norm", b.w_grad_norm},
                            {"ce_norm", b.ce_norm},
                            {"kl_norm", b.kl_norm},
                            {"grad_cosine_similarity", b.grad_cosine_similarity}};
      out << row.dump() << '\n';
    }
  }
}

std::vector<EpochTelemetry> read_epochs_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_epochs_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("read_epochs_csv: empty file " + path);
  if (line != kEpochsCsvHeader)
    throw ParseError("read_epochs_csv: unexpected header in " + path);
  std::vector<EpochTelemetry> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> vals;
    while (std::getline(ss, field, ',')) {
      try {
        vals.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw ParseError("read_epochs_csv: bad field at line " + std::to_string(lineno));
      }
    }
    if (vals.size() != 15)
      throw ParseError("read_epochs_csv: wrong column count at line " + std::to_string(lineno));
    EpochTelemetry e;
    e.epoch = static_cast<std::size_t>(vals[0]);
    e.lr = vals[1];
    e.clean_train_acc = vals[2];
    e.adv_train_acc = vals[3];
    e.gap = vals[4];
    e.clean_val_acc = vals[5];
    e.pgd_val_acc = vals[6];
    e.fosc_mean = vals[7];
    e.sgcs_mean = vals[8];
    e.w_grad_norm_mean = vals[9];
    e.ce_norm_mean = vals[10];
    e.kl_norm_mean = vals[11];
    e.grad_cos_mean = vals[12];
    e.guard_triggered = vals[13] != 0.0;
    e.noise_batches_applied = static_cast<std::size_t>(vals[14]);
    out.push_back(e);
  }
  return out;
}

}  // namespace tradeslab
