#pragma once

#include <string>
#include <vector>

#include "tradeslab/train.hpp"

namespace tradeslab {

// Column order is fixed and versioned; report parsing depends on it.
inline constexpr const char* kEpochsCsvHeader =
    "epoch,lr,clean_train_acc,adv_train_acc,gap,clean_val_acc,pgd_val_acc,"
    "fosc_mean,sgcs_mean,w_grad_norm_mean,ce_norm_mean,kl_norm_mean,"
    "grad_cos_mean,guard_triggered,noise_batches_applied";

void write_epochs_csv(const std::vector<EpochTelemetry>& epochs, const std::string& path);
void write_batches_jsonl(const std::vector<EpochTelemetry>& epochs, const std::string& path);

std::vector<EpochTelemetry> read_epochs_csv(const std::string& path);

}  // namespace tradeslab
