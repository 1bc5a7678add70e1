#include "edsim/channel_plan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace edsim {

ChannelPlan::ChannelPlan(int num_channels, int dft_size, double sample_rate)
    : num_channels_(num_channels), dft_size_(dft_size), sample_rate_(sample_rate) {
  if (num_channels < 2 || num_channels % 2 != 0)
    throw std::invalid_argument("num_channels must be a positive even integer, got " +
                                std::to_string(num_channels));
  if (dft_size <= 0 || dft_size % num_channels != 0)
    throw std::invalid_argument("dft_size must be a positive multiple of num_channels");
  if (dft_size / num_channels < 2)
    throw std::invalid_argument("dft_size / num_channels must be at least 2");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw std::invalid_argument("sample_rate must be positive and finite");
  for (int k = -num_channels / 2; k <= num_channels / 2; ++k)
    if (k != 0) channels_.push_back(k);
}

ChannelPlan ChannelPlan::with_bins(int num_channels, int bins_per_channel, double sample_rate) {
  if (bins_per_channel < 1) throw std::invalid_argument("bins_per_channel must be >= 1");
  return ChannelPlan(num_channels, num_channels * (bins_per_channel + 1), sample_rate);
}

bool ChannelPlan::has_channel(int k) const {
  return k != 0 && std::abs(k) <= num_channels_ / 2;
}

std::size_t ChannelPlan::position(int k) const {
  if (!has_channel(k)) throw std::invalid_argument("unknown channel index " + std::to_string(k));
  const int half = num_channels_ / 2;
  return static_cast<std::size_t>(k < 0 ? k + half : k + half - 1);
}

std::vector<int> ChannelPlan::bins(int k) const {
  if (!has_channel(k)) throw std::invalid_argument("unknown channel index " + std::to_string(k));
  const int slot = dft_size_ / num_channels_;
  const int first = (std::abs(k) - 1) * slot + 1;
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(slot - 1));
  if (k > 0) {
    for (int m = first; m < first + slot - 1; ++m) out.push_back(m);
  } else {
    for (int m = first + slot - 2; m >= first; --m) out.push_back(dft_size_ - m);
  }
  return out;
}

std::vector<int> ChannelPlan::guard_bins() const {
  std::vector<int> out;
  for (int m = 0; m < dft_size_; ++m)
    if (channel_of_bin(m) == 0) out.push_back(m);
  return out;
}

int ChannelPlan::channel_of_bin(int m) const {
  if (m < 0 || m >= dft_size_) throw std::out_of_range("bin index out of range");
  const int slot = dft_size_ / num_channels_;
  const bool negative = m > dft_size_ / 2;
  const int offset = negative ? dft_size_ - m : m;
  if (offset % slot == 0) return 0;
  const int k = offset / slot + 1;
  return negative ? -k : k;
}

std::vector<int> ChannelPlan::adjacent(int k) const {
  const std::size_t p = position(k);
  const std::size_t n = channels_.size();
  const int lo = channels_[(p + n - 1) % n];
  const int hi = channels_[(p + 1) % n];
  if (lo == hi) return {lo};
  return {lo, hi};
}

double ChannelPlan::bin_frequency(int m) const {
  const int signed_bin = m < dft_size_ / 2 ? m : m - dft_size_;
  return signed_bin * sample_rate_ / dft_size_;
}

}  // namespace edsim
