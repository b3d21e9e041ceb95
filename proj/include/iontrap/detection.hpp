#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Camera-readout pipeline simulator: synthetic EMCCD frames, threshold
// calibration, streaming row-wise classification and the latency budget.

namespace iontrap::detect {

struct CameraSpec {
  int roi_rows = 6;
  int roi_cols = 24;
  double pixel_pitch = 16e-6;        // m
  double magnification = 41.0;
  double em_gain = 100.0;            // deterministic multiplier by default
  bool em_excess_noise = false;      // gamma-distributed gain model
  double exposure = 1e-3;            // s
  double row_readout_time = 45e-6;   // s per row
  double frame_storage_overhead = 350e-6;  // s
  double decision_time = 10e-6;      // s, framegrabber ceiling
  double psf_sigma_px = 1.2;
  double bright_rate = 40.0;         // captured photons per ion per exposure
  double dark_rate = 0.2;            // background photons per pixel per exposure

  void validate() const;
  // Ion chain positions (m, centered) mapped to ROI pixel columns.
  std::vector<double> ion_columns(const std::vector<double>& positions_m) const;
  double ion_row() const { return 0.5 * (roi_rows - 1); }
};

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> pixels;  // row-major

  uint16_t at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

// Little-endian container: magic "IONF", u32 width, u32 height, u32 bit_depth=16.
void write_frame(const Frame& f, const std::string& path);
Frame read_frame(const std::string& path);

// Synthesizes one exposure: per-ion Gaussian PSF with Poisson photon counts on
// the bright rate plus per-pixel background, multiplied by the EM gain.
Frame synthesize_frame(const std::vector<bool>& bright, const std::vector<double>& ion_cols,
                       const CameraSpec& cam, std::mt19937_64& rng);

struct CalibrationTable {
  struct IonPixels {
    std::vector<int> pixels;  // flat row-major indices, disjoint across ions
    double threshold = 0.0;
    int last_row = 0;         // highest ROI row containing one of the pixels
    double bright_mean = 0.0;
    double dark_mean = 0.0;
  };
  std::vector<IonPixels> ions;
  int width = 0;
  int height = 0;
  int calibration_frames = 0;
};

struct CalibrationError : std::runtime_error {
  double overlap_estimate;
  CalibrationError(const std::string& what, double overlap)
      : std::runtime_error(what), overlap_estimate(overlap) {}
};

// Brightest-pixel clustering around the expected ion centers, then per-ion
// thresholds minimizing the summed empirical misclassification on the two
// training sets (ties resolved to the smallest threshold).
CalibrationTable calibrate(const std::vector<Frame>& bright_frames,
                           const std::vector<Frame>& dark_frames,
                           const std::vector<double>& ion_cols, const CameraSpec& cam,
                           int pixels_per_ion = 9);

// Reference batch classifier (full frame in hand).
std::vector<bool> classify_batch(const Frame& f, const CalibrationTable& table);

struct Decision {
  int ion = 0;
  bool bright = false;
  int emitted_after_row = 0;  // ROI row whose arrival completed the decision
  double timestamp = 0.0;     // s from exposure start
};

// Streaming row-wise classifier: rows are pushed in order and each ion's bit
// is emitted as soon as its last ROI row has been consumed, i.e. possibly
// before the frame ends. The final bitstring is identical to the batch path.
class StreamClassifier {
 public:
  StreamClassifier(const CalibrationTable& table, const CameraSpec& cam);

  // Returns decisions that became available with this row.
  std::vector<Decision> push_row(const std::vector<uint16_t>& row);
  bool frame_complete() const { return next_row_ == table_.height; }
  // Throws naming the missing rows if the stream was truncated.
  std::vector<bool> finish();
  void reset();

 private:
  const CalibrationTable& table_;
  CameraSpec cam_;
  int next_row_ = 0;
  std::vector<double> sums_;
  std::vector<bool> bits_;
  std::vector<bool> emitted_;
};

struct LatencyReport {
  double exposure = 0.0;
  double readout = 0.0;   // rows * row_readout_time + storage overhead
  double decision = 0.0;
  double total = 0.0;
};

LatencyReport latency_budget(const CameraSpec& cam);

}  // namespace iontrap::detect
