#pragma once

#include <vector>

namespace vloc {

struct FilterSpec {
    int order = 4;              // overall bandpass order (even)
    double low_hz = 0.5;
    double high_hz = 150.0;
    double sample_rate_hz = 1000.0;
    void validate() const;
};

struct Biquad {
    double b0, b1, b2;  // numerator
    double a1, a2;      // denominator (a0 = 1)
};

// Butterworth bandpass realized as a cascade of biquad sections via the
// analog prototype + bandpass transform + bilinear transform (band edges
// prewarped, so the -3 dB points land exactly on low_hz/high_hz).
class ButterworthBandpass {
  public:
    explicit ButterworthBandpass(const FilterSpec& spec);

    double magnitude(double f_hz) const;          // realized digital response
    void process_inplace(float* x, long n) const; // causal, single channel
    std::vector<float> impulse_response(long n) const;

    const std::vector<Biquad>& sections() const { return sections_; }

  private:
    FilterSpec spec_;
    std::vector<Biquad> sections_;
    double gain_ = 1.0;
};

}  // namespace vloc
