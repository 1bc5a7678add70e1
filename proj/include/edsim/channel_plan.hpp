#pragma once

#include <cstddef>
#include <vector>

namespace edsim {

/// Symmetric K-channel grid over an N-point DFT.
///
/// Channel indices are -K/2..-1, +1..+K/2. Each channel owns a slot of N/K
/// bins; the first bin of every slot (counted outward from DC) is a guard
/// bin, so bin 0 (DC) and bin N/2 (Nyquist) belong to no channel and each
/// channel has B = N/K - 1 bins. Channel -k is the exact mirror of +k:
/// bins(-k) = {(N - m) mod N : m in bins(+k)}.
class ChannelPlan {
 public:
  ChannelPlan(int num_channels, int dft_size, double sample_rate = 1.0);

  /// Plan with `bins_per_channel` bins per channel, i.e. N = K (B + 1).
  static ChannelPlan with_bins(int num_channels, int bins_per_channel, double sample_rate = 1.0);

  int num_channels() const { return num_channels_; }
  int dft_size() const { return dft_size_; }
  double sample_rate() const { return sample_rate_; }
  int bins_per_channel() const { return dft_size_ / num_channels_ - 1; }

  /// Channel indices in ascending order: -K/2..-1, +1..+K/2.
  const std::vector<int>& channels() const { return channels_; }
  bool has_channel(int k) const;
  /// Position of channel k in channels(); throws for unknown k.
  std::size_t position(int k) const;

  /// DFT bins of channel k, ascending in frequency.
  std::vector<int> bins(int k) const;
  /// Bins owned by no channel (DC, Nyquist, slot guards).
  std::vector<int> guard_bins() const;
  /// Channel owning bin m, or 0 for a guard bin.
  int channel_of_bin(int m) const;

  static int mirror(int k) { return -k; }
  /// Channels spectrally adjacent to k on the circular DFT frequency axis
  /// (+1 and -1 touch at DC, +K/2 and -K/2 at Nyquist).
  std::vector<int> adjacent(int k) const;

  /// Signed frequency of bin m in Hz.
  double bin_frequency(int m) const;

  bool operator==(const ChannelPlan& other) const = default;

 private:
  int num_channels_;
  int dft_size_;
  double sample_rate_;
  std::vector<int> channels_;
};

}  // namespace edsim
