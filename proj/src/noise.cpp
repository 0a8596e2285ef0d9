// Copyright 2026 The spdevo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spdevo/noise.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <new>
#include <numbers>
#include <string>

#include <fftw3.h>

#include "spdevo/error.hpp"

namespace spdevo {

/*
 * Node values of sum_j c_j sin(j pi k / J), k = 1..J-1, scaled by 2 as in
 * FFTW's RODFT00. The 1-D transform is a real-to-complex FFT of the odd
 * extension of length 2J; the 2-D transform is FFTW's RODFT00 in both
 * axes. Plans use FFTW_ESTIMATE so every process runs the same arithmetic.
 */
class SineTransform {
public:
    SineTransform(std::size_t intervals, int rank) : n_(static_cast<int>(intervals) - 1), rank_(rank)
    {
        Buffers& buf = buffers(buffer_size());
        std::lock_guard lock(planner_mutex());
        const unsigned flags = FFTW_ESTIMATE | FFTW_DESTROY_INPUT;
        plan_ = rank == 1 ? fftw_plan_dft_r2c_1d(2 * (n_ + 1), buf.in, reinterpret_cast<fftw_complex*>(buf.out), flags)
                          : fftw_plan_r2r_2d(n_, n_, buf.in, buf.out, FFTW_RODFT00, FFTW_RODFT00, flags);
        if (plan_ == nullptr) {
            throw NumericError("could not plan the sine transform");
        }
    }
    SineTransform(const SineTransform&) = delete;
    SineTransform& operator=(const SineTransform&) = delete;
    ~SineTransform()
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }

    int n() const noexcept { return n_; }

    /// Folds mode j (1-based) onto the J-1 distinct node patterns; returns
    /// the slot (0-based) and sign, or slot -1 when the mode vanishes on nodes.
    std::pair<int, double> fold(std::size_t j) const noexcept
    {
        const std::size_t half = static_cast<std::size_t>(n_ + 1);
        const std::size_t r = j % (2 * half);
        if (r == 0 || r == half) return {-1, 0.0};
        if (r < half) return {static_cast<int>(r) - 1, 1.0};
        return {static_cast<int>(2 * half - r) - 1, -1.0};
    }

    /// Zeroed input coefficients of this thread; fill them, then call run().
    double* input() const
    {
        Buffers& buf = buffers(buffer_size());
        if (rank_ == 1) {
            std::fill(buf.in, buf.in + n_ + 2, 0.0);
            return buf.in + 1;
        }
        std::fill(buf.in, buf.in + buffer_size(), 0.0);
        return buf.in;
    }

    /// Transforms the thread's input coefficients; returns the n (or n*n) outputs.
    const double* run() const noexcept
    {
        Buffers& buf = buffers(buffer_size());
        if (rank_ != 1) {
            fftw_execute_r2r(plan_, buf.in, buf.out);
            return buf.out;
        }
        const int m = 2 * (n_ + 1);
        for (int k = 1; k <= n_; ++k) buf.in[m - k] = -buf.in[k];
        fftw_execute_dft_r2c(plan_, buf.in, reinterpret_cast<fftw_complex*>(buf.out));
        // Im X_j = -sum_k x_k sin(pi j k / (n + 1)) over the extension.
        for (int j = 1; j <= n_; ++j) buf.in[j - 1] = -buf.out[2 * j + 1];
        return buf.in;
    }

private:
    std::size_t buffer_size() const noexcept
    {
        return rank_ == 1 ? 2 * static_cast<std::size_t>(n_ + 2)
                          : static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    }

    // fftw_malloc keeps every buffer equally aligned, so the plan's codelets
    // are valid for all threads.
    struct Buffers {
        double* in = nullptr;
        double* out = nullptr;
        std::size_t size = 0;
        ~Buffers()
        {
            fftw_free(in);
            fftw_free(out);
        }
    };

    static Buffers& buffers(std::size_t size)
    {
        thread_local Buffers buf;
        if (buf.size < size) {
            fftw_free(buf.in);
            fftw_free(buf.out);
            buf.in = static_cast<double*>(fftw_malloc(size * sizeof(double)));
            buf.out = static_cast<double*>(fftw_malloc(size * sizeof(double)));
            if (buf.in == nullptr || buf.out == nullptr) {
                throw std::bad_alloc();
            }
            buf.size = size;
        }
        return buf;
    }

    static std::mutex& planner_mutex()
    {
        static std::mutex m;
        return m;
    }

    int n_;
    int rank_;
    fftw_plan plan_ = nullptr;
};

namespace {

// Slot and signed amplitude of every mode in the folded transform input.
void fold_table(const SineTransform& dst, std::span<const double> amplitudes, std::vector<int>& slots,
                std::vector<double>& gains)
{
    slots.resize(amplitudes.size());
    gains.resize(amplitudes.size());
    for (std::size_t j = 0; j < amplitudes.size(); ++j) {
        const auto [slot, sign] = dst.fold(j + 1);
        slots[j] = slot;
        gains[j] = sign * amplitudes[j];
    }
}

} // namespace

double basis_eval(std::size_t j, double x, double length)
{
    if (j == 0) {
        throw DomainError("basis_eval: mode index starts at 1");
    }
    if (!(x >= 0.0 && x <= length)) {
        throw DomainError("basis_eval: x = " + std::to_string(x) + " outside [0, " + std::to_string(length) + "]");
    }
    return std::sqrt(2.0 / length) * std::sin(static_cast<double>(j) * std::numbers::pi * x / length);
}

std::vector<double> eigenvalue_profile(std::size_t modes, double decay)
{
    if (decay < 0.0) {
        throw ConfigError("noise decay exponent must be non-negative");
    }
    std::vector<double> lambda(modes, 1.0);
    if (decay > 0.0) {
        for (std::size_t j = 0; j < modes; ++j) {
            lambda[j] = std::pow(static_cast<double>(j + 1), -2.0 * decay);
        }
    }
    return lambda;
}

SpectralBasis1D::SpectralBasis1D(const Grid1D& grid, std::size_t modes, std::vector<double> eigenvalues)
    : grid_(grid), eigenvalues_(std::move(eigenvalues))
{
    if (modes == 0) {
        modes = grid.intervals();
    }
    if (eigenvalues_.empty()) {
        eigenvalues_.assign(modes, 1.0);
    }
    if (eigenvalues_.size() != modes) {
        throw DimensionError("expected " + std::to_string(modes) + " eigenvalues, got " +
                             std::to_string(eigenvalues_.size()));
    }
    for (double l : eigenvalues_) {
        if (!(l >= 0.0)) {
            throw ConfigError("noise eigenvalues must be non-negative");
        }
    }
    const std::size_t n = grid.node_count();
    values_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(modes));
    synthesis_.resizeLike(values_);
    for (std::size_t j = 0; j < modes; ++j) {
        const double amp = std::sqrt(eigenvalues_[j]);
        for (std::size_t k = 0; k < n; ++k) {
            // Endpoints are exactly zero rather than sin(j*pi) round-off.
            const double e = (k == 0 || k + 1 == n) ? 0.0 : basis_eval(j + 1, grid.node(k), grid.length());
            values_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = e;
            synthesis_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = amp * e;
        }
    }
    if (grid.intervals() >= 3) {
        transform_ = std::make_shared<const SineTransform>(grid.intervals(), 1);
        std::vector<double> amp(modes);
        for (std::size_t j = 0; j < modes; ++j) amp[j] = std::sqrt(eigenvalues_[j]);
        fold_table(*transform_, amp, slots_, gains_);
    }
}

SpectralBasis1D::SpectralBasis1D(const Grid1D& grid, std::size_t modes)
    : SpectralBasis1D(grid, modes, {})
{
}

SpectralBasis2D::SpectralBasis2D(const Grid2D& grid, std::size_t modes_per_axis, double decay)
    : grid_(grid), modes_(modes_per_axis == 0 ? grid.x_axis().intervals() : modes_per_axis)
{
    const auto r = static_cast<Eigen::Index>(modes_);
    const SpectralBasis1D bx(grid.x_axis(), modes_);
    const SpectralBasis1D by(grid.y_axis(), modes_);
    ex_ = bx.values();
    ey_ = by.values();
    amplitudes_.resize(r, r);
    // lambda_jk = (j^2 + k^2)^(-decay) generalizes the 1-D j^(-2 decay) profile.
    for (Eigen::Index k = 0; k < r; ++k) {
        for (Eigen::Index j = 0; j < r; ++j) {
            const double jj = static_cast<double>(j + 1);
            const double kk = static_cast<double>(k + 1);
            amplitudes_(j, k) = decay > 0.0 ? std::pow(jj * jj + kk * kk, -0.5 * decay) : 1.0;
        }
    }
    if (grid.nx() == grid.ny() && grid.x_axis().intervals() >= 3) {
        transform_ = std::make_shared<const SineTransform>(grid.x_axis().intervals(), 2);
        fold_table(*transform_, std::vector<double>(modes_, 1.0), slots_, gains_);
    }
}

std::vector<double> sample_mode_increments(std::size_t modes, double dt, const NormalStream& stream,
                                           std::uint64_t bin)
{
    if (dt < 0.0) {
        throw DomainError("sample_mode_increments: dt must be non-negative");
    }
    std::vector<double> out(modes, 0.0);
    if (dt == 0.0) {
        return out;
    }
    stream.fill_scaled(bin, std::sqrt(dt), out);
    return out;
}

void assemble_field_increment_into(const Eigen::Ref<const Eigen::VectorXd>& dbeta, const SpectralBasis1D& basis,
                                   Eigen::Ref<Eigen::VectorXd> out)
{
    if (!basis.transform_) {
        out.noalias() = basis.synthesis() * dbeta;
        return;
    }
    const SineTransform& dst = *basis.transform_;
    const int n = dst.n();
    double* coeff = dst.input();
    for (std::size_t j = 0; j < basis.slots_.size(); ++j) {
        if (basis.slots_[j] >= 0) {
            coeff[basis.slots_[j]] += basis.gains_[j] * dbeta[static_cast<Eigen::Index>(j)];
        }
    }
    const double* y = dst.run();
    const double scale = 0.5 * std::sqrt(2.0 / basis.grid().length());
    out[0] = 0.0;
    for (int k = 0; k < n; ++k) out[k + 1] = scale * y[k];
    out[n + 1] = 0.0;
}

void assemble_field_increment_into(const Eigen::Ref<const Eigen::VectorXd>& dbeta, const SpectralBasis2D& basis,
                                   Eigen::MatrixXd& scratch, Eigen::Ref<Eigen::VectorXd> out)
{
    const auto r = static_cast<Eigen::Index>(basis.modes_per_axis());
    const Eigen::Map<const Eigen::MatrixXd> b(dbeta.data(), r, r);
    if (basis.transform_) {
        const SineTransform& dst = *basis.transform_;
        const int n = dst.n();
        const std::size_t nx = basis.grid().nx();
        double* coeff = dst.input();
        // Row-major n x n input: y mode outer, x mode inner.
        for (Eigen::Index q = 0; q < r; ++q) {
            const int sy = basis.slots_[static_cast<std::size_t>(q)];
            if (sy < 0) continue;
            const double gy = basis.gains_[static_cast<std::size_t>(q)];
            for (Eigen::Index p = 0; p < r; ++p) {
                const int sx = basis.slots_[static_cast<std::size_t>(p)];
                if (sx < 0) continue;
                coeff[sy * n + sx] += basis.gains_[static_cast<std::size_t>(p)] * gy * basis.amplitudes()(p, q) * b(p, q);
            }
        }
        const double* field = dst.run();
        const double scale = 0.25 * 2.0 / basis.grid().length();
        out.setZero();
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                out[static_cast<Eigen::Index>((j + 1) * nx + i + 1)] = scale * field[j * n + i];
            }
        }
        return;
    }
    // W(x_i, y_j) = sum_{p,q} e_p(x_i) A(p,q) B(p,q) e_q(y_j); stored with x fastest.
    scratch.noalias() = basis.x_values() * basis.amplitudes().cwiseProduct(b);
    Eigen::Map<Eigen::MatrixXd> w(out.data(), static_cast<Eigen::Index>(basis.grid().nx()),
                                  static_cast<Eigen::Index>(basis.grid().ny()));
    w.noalias() = scratch * basis.y_values().transpose();
}

std::vector<double> assemble_field_increment(std::span<const double> dbeta, const SpectralBasis1D& basis)
{
    if (dbeta.size() != basis.modes()) {
        throw DimensionError("assemble_field_increment: got " + std::to_string(dbeta.size()) + " increments for " +
                             std::to_string(basis.modes()) + " modes");
    }
    std::vector<double> out(basis.grid().node_count());
    const Eigen::Map<const Eigen::VectorXd> b(dbeta.data(), static_cast<Eigen::Index>(dbeta.size()));
    Eigen::Map<Eigen::VectorXd> w(out.data(), static_cast<Eigen::Index>(out.size()));
    assemble_field_increment_into(b, basis, w);
    return out;
}

std::vector<double> assemble_field_increment(std::span<const double> dbeta, const SpectralBasis2D& basis)
{
    if (dbeta.size() != basis.modes()) {
        throw DimensionError("assemble_field_increment: got " + std::to_string(dbeta.size()) + " increments for " +
                             std::to_string(basis.modes()) + " modes");
    }
    std::vector<double> out(basis.grid().node_count());
    Eigen::MatrixXd scratch;
    const Eigen::Map<const Eigen::VectorXd> b(dbeta.data(), static_cast<Eigen::Index>(dbeta.size()));
    Eigen::Map<Eigen::VectorXd> w(out.data(), static_cast<Eigen::Index>(out.size()));
    assemble_field_increment_into(b, basis, scratch, w);
    return out;
}

} // namespace spdevo
