#pragma once

#include <atomic>
#include <complex>
#include <cstdint>
#include <vector>

#include "flowvoc/common.hpp"

namespace flowvoc::spectral {

// Analysis/synthesis configuration. Window is periodic Hann; forward and
// inverse transforms both scale by 1/sqrt(n_fft) so the pair is orthonormal.
struct SpectralConfig {
    int sample_rate = 22050;
    int n_fft = 1024;
    int win_length = 1024;
    int hop_length = 256;
    int n_mels = 100;
    bool center_pad = true;
    bool orthonormal = true;
    double mel_floor = 1e-5;  // clamp before the natural log

    int bins() const { return n_fft / 2 + 1; }
    int frames_for(std::int64_t n_samples) const;
    std::int64_t samples_for(int frames) const {
        return static_cast<std::int64_t>(frames - 1) * hop_length;
    }
};

void validate(const SpectralConfig& cfg);

template <typename T>
struct WaveformT {
    std::vector<T> samples;
    int sample_rate = 0;
};

template <typename T>
struct ComplexSpectrogramT {
    int bins = 0;
    int frames = 0;
    std::vector<std::complex<T>> data;  // [bins, frames] row-major

    std::complex<T>& at(int k, int f) { return data[static_cast<std::size_t>(k) * frames + f]; }
    const std::complex<T>& at(int k, int f) const {
        return data[static_cast<std::size_t>(k) * frames + f];
    }
};

template <typename T>
struct MelSpectrogramT {
    int n_mels = 0;
    int frames = 0;
    std::vector<T> data;  // [n_mels, frames] row-major, natural-log scale
};

using Waveform = WaveformT<float>;
using ComplexSpectrogram = ComplexSpectrogramT<float>;
using MelSpectrogram = MelSpectrogramT<float>;

// Call counters for the transform-cost instrumentation.
struct TransformCounters {
    std::uint64_t stft_calls = 0;
    std::uint64_t istft_calls = 0;
};
TransformCounters transform_counters();
void reset_transform_counters();

template <typename T>
ComplexSpectrogramT<T> stft(const WaveformT<T>& x, const SpectralConfig& cfg);

template <typename T>
WaveformT<T> istft(const ComplexSpectrogramT<T>& spec, const SpectralConfig& cfg);

template <typename T>
MelSpectrogramT<T> log_mel(const WaveformT<T>& x, const SpectralConfig& cfg);

// |spec| as a real [bins, frames] array.
template <typename T>
std::vector<T> magnitude(const ComplexSpectrogramT<T>& spec);

// Adjoint (transpose) of the linear map stft: given a cotangent on the
// spectrogram, returns the cotangent on a waveform of n_samples samples.
template <typename T>
WaveformT<T> stft_adjoint(const ComplexSpectrogramT<T>& bar, const SpectralConfig& cfg,
                          std::int64_t n_samples);

// Adjoint of istft for an input spectrogram with `frames` frames.
template <typename T>
ComplexSpectrogramT<T> istft_adjoint(const WaveformT<T>& bar, const SpectralConfig& cfg,
                                     int frames);

// Slaney-style triangular Mel filterbank, [n_mels, bins] row-major.
std::vector<double> mel_filterbank(const SpectralConfig& cfg);

// Periodic Hann window of length n.
template <typename T>
std::vector<T> hann_window(int n);

}  // namespace flowvoc::spectral
