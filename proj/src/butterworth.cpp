#include "vloc/sig/butterworth.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace vloc {

namespace {
using cplx = std::complex<double>;
}

void FilterSpec::validate() const {
    if (order < 2 || order % 2 != 0)
        throw std::runtime_error("filter: bandpass order must be even and >= 2");
    if (!(0 < low_hz && low_hz < high_hz && high_hz < 0.5 * sample_rate_hz))
        throw std::runtime_error("filter: need 0 < low < high < Nyquist");
}

ButterworthBandpass::ButterworthBandpass(const FilterSpec& spec) : spec_(spec) {
    spec.validate();
    const int n_proto = spec.order / 2;
    const double fs2 = 2.0 * spec.sample_rate_hz;
    // Prewarped analog band edges.
    const double w1 = fs2 * std::tan(M_PI * spec.low_hz / spec.sample_rate_hz);
    const double w2 = fs2 * std::tan(M_PI * spec.high_hz / spec.sample_rate_hz);
    const double w0 = std::sqrt(w1 * w2);
    const double bw = w2 - w1;

    // Analog bandpass poles from the lowpass prototype via
    // s_lp -> (s^2 + w0^2) / (bw s).
    std::vector<cplx> poles;
    for (int k = 0; k < n_proto; ++k) {
        const double theta = M_PI_2 + M_PI * (2.0 * k + 1.0) / (2.0 * n_proto);
        const cplx p(std::cos(theta), std::sin(theta));
        const cplx pb = p * bw;
        const cplx disc = std::sqrt(pb * pb - 4.0 * w0 * w0);
        poles.push_back(0.5 * (pb + disc));
        poles.push_back(0.5 * (pb - disc));
    }

    // Bilinear transform; zeros land on z = +1 (n_proto) and z = -1 (n_proto).
    std::vector<cplx> zpoles;
    for (const cplx& s : poles) zpoles.push_back((fs2 + s) / (fs2 - s));

    // Group into conjugate pairs.
    std::vector<cplx> upper;
    for (const cplx& z : zpoles)
        if (z.imag() > 0.0) upper.push_back(z);
    if (static_cast<int>(upper.size()) != n_proto)
        throw std::runtime_error("filter: pole pairing failed");
    sections_.clear();
    for (const cplx& z : upper) {
        Biquad s;
        s.b0 = 1.0;
        s.b1 = 0.0;
        s.b2 = -1.0;  // (z-1)(z+1)
        s.a1 = -2.0 * z.real();
        s.a2 = std::norm(z);
        sections_.push_back(s);
    }

    // Unit gain at the analog center frequency (mapped through the bilinear
    // transform), where the Butterworth bandpass magnitude is exactly 1.
    const double f_center = spec.sample_rate_hz / M_PI * std::atan(w0 / fs2);
    gain_ = 1.0;
    const double m = magnitude(f_center);
    if (m <= 0) throw std::runtime_error("filter: degenerate design");
    gain_ = 1.0 / m;
}

double ButterworthBandpass::magnitude(double f_hz) const {
    const cplx z = std::polar(1.0, 2.0 * M_PI * f_hz / spec_.sample_rate_hz);
    const cplx zi = 1.0 / z;
    cplx h = gain_;
    for (const auto& s : sections_)
        h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
    return std::abs(h);
}

void ButterworthBandpass::process_inplace(float* x, long n) const {
    // Transposed direct form II per section; overall gain folded in once.
    std::vector<double> s1(sections_.size(), 0.0), s2(sections_.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        double v = gain_ * static_cast<double>(x[i]);
        for (size_t k = 0; k < sections_.size(); ++k) {
            const Biquad& q = sections_[k];
            const double y = q.b0 * v + s1[k];
            s1[k] = q.b1 * v - q.a1 * y + s2[k];
            s2[k] = q.b2 * v - q.a2 * y;
            v = y;
        }
        x[i] = static_cast<float>(v);
    }
}

std::vector<float> ButterworthBandpass::impulse_response(long n) const {
    std::vector<float> x(static_cast<size_t>(n), 0.0f);
    x[0] = 1.0f;
    process_inplace(x.data(), n);
    return x;
}

}  // namespace vloc
