#pragma once

// Piecewise-constant high-contrast permeability on the fine mesh: one value
// per fine element, generated from channel/inclusion geometry or read from CSV.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "damgms/errors.hpp"
#include "damgms/grid.hpp"

namespace damgms {

class PermeabilityField {
public:
    PermeabilityField() = default;

    PermeabilityField(int nx, int ny, std::vector<double> values) : nx_(nx), ny_(ny), values_(std::move(values)) {
        if (static_cast<int>(values_.size()) != nx_ * ny_) {
            throw InvalidArgument("permeability needs " + std::to_string(nx_ * ny_) + " values, got " +
                                  std::to_string(values_.size()));
        }
        for (double v : values_) {
            if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("permeability values must be positive");
        }
    }

    static PermeabilityField constant(const FineMesh& mesh, double value) {
        return {mesh.nx(), mesh.ny(), std::vector<double>(mesh.element_count(), value)};
    }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int e) const { return values_[e]; }
    const std::vector<double>& values() const { return values_; }

    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }
    double contrast() const { return max() / min(); }

    bool matches(const FineMesh& mesh) const { return nx_ == mesh.nx() && ny_ == mesh.ny(); }

    PermeabilityField scaled(double c) const {
        std::vector<double> v = values_;
        for (double& x : v) x *= c;
        return {nx_, ny_, std::move(v)};
    }

    friend bool operator==(const PermeabilityField&, const PermeabilityField&) = default;

private:
    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> values_;
};

/// Axis-aligned strip. For a horizontal channel `band` is the x2 interval
/// and `extent` the x1 interval; vertical channels swap the roles.
struct Channel {
    double band_lo = 0.0;
    double band_hi = 0.0;
    double extent_lo = 0.0;
    double extent_hi = 1.0;
};

namespace detail {

inline bool channel_is_empty(const Channel& c) {
    return !(c.band_hi > c.band_lo) || !(c.extent_hi > c.extent_lo);
}

inline void check_values(double kappa_bg, double kappa_hi) {
    if (!(kappa_bg > 0.0) || !(kappa_hi > 0.0)) throw InvalidArgument("permeability values must be positive");
}

inline void check_channel(const Channel& c) {
    auto inside = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!inside(c.band_lo) || !inside(c.band_hi) || !inside(c.extent_lo) || !inside(c.extent_hi)) {
        throw InvalidArgument("channel bounds must lie in [0, 1]");
    }
}

inline std::vector<double> paint_channels(const FineMesh& mesh, const std::vector<Channel>& channels, bool vertical,
                                          double kappa_bg, double kappa_hi) {
    check_values(kappa_bg, kappa_hi);
    std::vector<double> values(mesh.element_count(), kappa_bg);
    for (const Channel& c : channels) {
        check_channel(c);
        int painted = 0;
        if (!channel_is_empty(c)) {
            for (int e = 0; e < mesh.element_count(); ++e) {
                const Point x = mesh.centroid(e);
                const double across = vertical ? x.x1 : x.x2;
                const double along = vertical ? x.x2 : x.x1;
                if (across >= c.band_lo && across <= c.band_hi && along >= c.extent_lo && along <= c.extent_hi) {
                    values[e] = kappa_hi;
                    ++painted;
                }
            }
        }
        if (painted == 0) {
            std::clog << "warning: channel [" << c.band_lo << ", " << c.band_hi << "] x [" << c.extent_lo << ", "
                      << c.extent_hi << "] covers no element centroid; ignored\n";
        }
    }
    return values;
}

// Uniform in [0, 1) from the raw 64-bit engine output; the standard
// distributions are not bit-reproducible across library implementations.
inline double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng); }

}  // namespace detail

/// Default horizontal layout: thin full-length channels placed off the
/// 0.1-spaced coarse lines, clear of the impervious bottom.
inline std::vector<Channel> default_horizontal_channels() {
    return {
        {0.12, 0.15, 0.08, 0.92},
        {0.31, 0.33, 0.05, 0.95},
        {0.47, 0.50, 0.12, 0.88},
        {0.64, 0.66, 0.05, 0.95},
        {0.83, 0.86, 0.10, 0.90},
    };
}

inline std::vector<Channel> default_vertical_channels() { return default_horizontal_channels(); }

inline PermeabilityField gen_horizontal_channels(const FineMesh& mesh, const std::vector<Channel>& channels,
                                                 double kappa_bg, double kappa_hi) {
    return {mesh.nx(), mesh.ny(), detail::paint_channels(mesh, channels, false, kappa_bg, kappa_hi)};
}

inline PermeabilityField gen_vertical_channels(const FineMesh& mesh, const std::vector<Channel>& channels,
                                               double kappa_bg, double kappa_hi) {
    return {mesh.nx(), mesh.ny(), detail::paint_channels(mesh, channels, true, kappa_bg, kappa_hi)};
}

/// Random geometry for the mixed field. Channels are axis aligned strips of
/// random length; inclusions are squares or ellipses (by `ellipse_fraction`).
/// Everything random is placed inside [window_lo, window_hi]^2; the default
/// keeps it out of the outermost ring of 10x10 coarse cells.
struct InclusionFieldSpec {
    double window_lo = 0.1;
    double window_hi = 0.9;
    int horizontal_channels = 4;
    int vertical_channels = 2;
    double channel_width_min = 0.015;
    double channel_width_max = 0.03;
    double channel_length_min = 0.4;
    double channel_length_max = 0.8;
    int inclusions = 40;
    double inclusion_size_min = 0.02;
    double inclusion_size_max = 0.05;
    double ellipse_fraction = 0.5;
    /// Deterministic channels painted before the random ones (horizontal).
    std::vector<Channel> fixed_channels;
};

inline PermeabilityField gen_channels_and_inclusions(const FineMesh& mesh, std::uint64_t seed,
                                                     const InclusionFieldSpec& spec, double kappa_bg,
                                                     double kappa_hi) {
    detail::check_values(kappa_bg, kappa_hi);
    if (spec.horizontal_channels < 0 || spec.vertical_channels < 0 || spec.inclusions < 0) {
        throw InvalidArgument("inclusion field counts must be nonnegative");
    }
    const double lo = spec.window_lo;
    const double hi = spec.window_hi;
    if (!(lo >= 0.0 && hi <= 1.0 && hi > lo)) throw InvalidArgument("inclusion window must satisfy 0 <= lo < hi <= 1");
    if (spec.channel_length_max > hi - lo || spec.channel_width_max > hi - lo) {
        throw InvalidArgument("channels do not fit in the inclusion window");
    }
    std::vector<double> values = detail::paint_channels(mesh, spec.fixed_channels, false, kappa_bg, kappa_hi);
    std::mt19937_64 rng(seed);

    auto paint_if = [&](auto&& inside) {
        for (int e = 0; e < mesh.element_count(); ++e) {
            const Point x = mesh.centroid(e);
            if (x.x1 >= lo && x.x1 <= hi && x.x2 >= lo && x.x2 <= hi && inside(x)) values[e] = kappa_hi;
        }
    };

    const int total_channels = spec.horizontal_channels + spec.vertical_channels;
    for (int c = 0; c < total_channels; ++c) {
        const bool vertical = c >= spec.horizontal_channels;
        const double width = detail::uniform(rng, spec.channel_width_min, spec.channel_width_max);
        const double length = detail::uniform(rng, spec.channel_length_min, spec.channel_length_max);
        const double across = detail::uniform(rng, lo, hi - width);
        const double along = detail::uniform(rng, lo, hi - length);
        paint_if([&](Point x) {
            const double a = vertical ? x.x1 : x.x2;
            const double b = vertical ? x.x2 : x.x1;
            return a >= across && a <= across + width && b >= along && b <= along + length;
        });
    }

    for (int k = 0; k < spec.inclusions; ++k) {
        const double size = detail::uniform(rng, spec.inclusion_size_min, spec.inclusion_size_max);
        const double cx = detail::uniform(rng, lo, hi);
        const double cy = detail::uniform(rng, lo, hi);
        const bool ellipse = detail::unit_uniform(rng) < spec.ellipse_fraction;
        const double aspect = detail::uniform(rng, 0.6, 1.6);
        const double rx = 0.5 * size * aspect;
        const double ry = 0.5 * size / aspect;
        paint_if([&](Point x) {
            const double dx = (x.x1 - cx) / rx;
            const double dy = (x.x2 - cy) / ry;
            return ellipse ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
        });
    }
    return {mesh.nx(), mesh.ny(), std::move(values)};
}

/// One CSV line per element row j, comma-separated over i.
inline void save_field(const PermeabilityField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    char buf[32];
    for (int j = 0; j < field.ny(); ++j) {
        for (int i = 0; i < field.nx(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", field[j * field.nx() + i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw FormatError("write to '" + path + "' failed");
}

inline PermeabilityField load_field(const FineMesh& mesh, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open permeability file '" + path + "'");
    std::vector<double> values;
    values.reserve(mesh.element_count());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
            }
            if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": trailing characters in '" + cell + "'");
            }
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw FormatError(path + ":" + std::to_string(line_no) + ": permeability must be positive, got " +
                                  cell);
            }
            values.push_back(v);
        }
    }
    if (static_cast<int>(values.size()) != mesh.element_count()) {
        throw FormatError(path + ": expected " + std::to_string(mesh.element_count()) + " values, found " +
                          std::to_string(values.size()));
    }
    return {mesh.nx(), mesh.ny(), std::move(values)};
}

}  // namespace damgms
