#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "versekit/errors.hpp"

namespace versekit {

// Closed interval [lo, hi]. Degenerate (lo == hi) intervals are valid and
// represent points.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    Interval() = default;
    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(lo <= hi)) {
            throw Error(ErrorCode::Eval, "invalid interval [" + std::to_string(lo_) + ", " +
                                             std::to_string(hi_) + "]");
        }
    }

    static Interval point(double v) { return Interval(v, v); }

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool is_point() const { return lo == hi; }
    bool contains(double v) const { return lo <= v && v <= hi; }
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }

    bool operator==(const Interval& other) const = default;
};

// Interval arithmetic. Results are the exact image ranges; no outward
// rounding is applied.
inline Interval operator+(const Interval& a, const Interval& b) {
    return {a.lo + b.lo, a.hi + b.hi};
}

inline Interval operator-(const Interval& a, const Interval& b) {
    return {a.lo - b.hi, a.hi - b.lo};
}

inline Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }

inline Interval operator*(const Interval& a, const Interval& b) {
    const double p1 = a.lo * b.lo;
    const double p2 = a.lo * b.hi;
    const double p3 = a.hi * b.lo;
    const double p4 = a.hi * b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains(0.0)) {
        throw Error(ErrorCode::Eval, "interval division by an interval containing zero");
    }
    const double p1 = a.lo / b.lo;
    const double p2 = a.lo / b.hi;
    const double p3 = a.hi / b.lo;
    const double p4 = a.hi / b.hi;
    return {std::min(std::min(p1, p2), std::min(p3, p4)),
            std::max(std::max(p1, p2), std::max(p3, p4))};
}

inline Interval abs(const Interval& a) {
    if (a.lo >= 0.0) return a;
    if (a.hi <= 0.0) return {-a.hi, -a.lo};
    return {0.0, std::max(-a.lo, a.hi)};
}

inline Interval sqrt(const Interval& a) {
    if (a.lo < 0.0) {
        throw Error(ErrorCode::Eval, "interval sqrt of a partially negative interval");
    }
    return {std::sqrt(a.lo), std::sqrt(a.hi)};
}

// Axis-aligned box over the continuous state dimensions. The universal set
// representation for reach computation.
class HyperRect {
  public:
    HyperRect() = default;
    explicit HyperRect(std::vector<Interval> dims) : dims_(std::move(dims)) {
        if (dims_.empty()) {
            throw Error(ErrorCode::Eval, "hyperrectangle must have at least one dimension");
        }
    }

    static HyperRect from_bounds(std::span<const double> lo, std::span<const double> hi) {
        if (lo.size() != hi.size()) {
            throw Error(ErrorCode::Eval, "lo/hi bound lists differ in length");
        }
        std::vector<Interval> dims;
        dims.reserve(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) dims.emplace_back(lo[i], hi[i]);
        return HyperRect(std::move(dims));
    }

    static HyperRect point(std::span<const double> v) { return from_bounds(v, v); }

    std::size_t size() const { return dims_.size(); }
    const Interval& operator[](std::size_t i) const { return dims_[i]; }
    Interval& operator[](std::size_t i) { return dims_[i]; }
    const std::vector<Interval>& dims() const { return dims_; }

    std::vector<double> lower() const {
        std::vector<double> v(dims_.size());
        for (std::size_t i = 0; i < dims_.size(); ++i) v[i] = dims_[i].lo;
        return v;
    }

    std::vector<double> upper() const {
        std::vector<double> v(dims_.size());
        for (std::size_t i = 0; i < dims_.size(); ++i) v[i] = dims_[i].hi;
        return v;
    }

    std::vector<double> center() const {
        std::vector<double> v(dims_.size());
        for (std::size_t i = 0; i < dims_.size(); ++i) v[i] = dims_[i].mid();
        return v;
    }

    bool is_point() const {
        for (const auto& d : dims_) {
            if (!d.is_point()) return false;
        }
        return true;
    }

    // Sub-box over dims [offset, offset + count).
    HyperRect slice(std::size_t offset, std::size_t count) const {
        if (offset + count > dims_.size()) {
            throw Error(ErrorCode::Eval, "hyperrectangle slice out of range");
        }
        return HyperRect(std::vector<Interval>(dims_.begin() + static_cast<long>(offset),
                                               dims_.begin() + static_cast<long>(offset + count)));
    }

    bool operator==(const HyperRect& other) const = default;

  private:
    std::vector<Interval> dims_;
};

inline void require_same_dims(const HyperRect& a, const HyperRect& b, const char* op) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::Eval, std::string(op) + ": dimension mismatch (" +
                                         std::to_string(a.size()) + " vs " +
                                         std::to_string(b.size()) + ")");
    }
}

// True iff inner lies inside outer in every dimension.
inline bool contains(const HyperRect& outer, const HyperRect& inner) {
    require_same_dims(outer, inner, "contains");
    for (std::size_t i = 0; i < outer.size(); ++i) {
        if (!outer[i].contains(inner[i])) return false;
    }
    return true;
}

inline bool contains_point(const HyperRect& rect, std::span<const double> p) {
    if (rect.size() != p.size()) {
        throw Error(ErrorCode::Eval, "contains_point: dimension mismatch");
    }
    for (std::size_t i = 0; i < rect.size(); ++i) {
        if (!rect[i].contains(p[i])) return false;
    }
    return true;
}

// Boxes are closed: touching at a single boundary value counts as a
// nonempty (degenerate) intersection.
inline std::optional<HyperRect> intersect(const HyperRect& a, const HyperRect& b) {
    require_same_dims(a, b, "intersect");
    std::vector<Interval> dims;
    dims.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double lo = std::max(a[i].lo, b[i].lo);
        const double hi = std::min(a[i].hi, b[i].hi);
        if (lo > hi) return std::nullopt;
        dims.emplace_back(lo, hi);
    }
    return HyperRect(std::move(dims));
}

// Smallest box containing both inputs.
inline HyperRect hull(const HyperRect& a, const HyperRect& b) {
    require_same_dims(a, b, "hull");
    std::vector<Interval> dims;
    dims.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        dims.emplace_back(std::min(a[i].lo, b[i].lo), std::max(a[i].hi, b[i].hi));
    }
    return HyperRect(std::move(dims));
}

// Widen every dimension by +/- eps[i].
inline HyperRect bloat(const HyperRect& r, std::span<const double> eps) {
    if (eps.size() != r.size()) {
        throw Error(ErrorCode::Eval, "bloat: eps length does not match dimension count");
    }
    std::vector<Interval> dims;
    dims.reserve(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (eps[i] < 0.0) {
            throw Error(ErrorCode::Eval, "bloat: negative eps at dimension " + std::to_string(i));
        }
        dims.emplace_back(r[i].lo - eps[i], r[i].hi + eps[i]);
    }
    return HyperRect(std::move(dims));
}

inline HyperRect bloat(const HyperRect& r, double eps) {
    std::vector<double> v(r.size(), eps);
    return bloat(r, v);
}

// Reachtube segment: the states covered over [t_lo, t_hi].
struct TimedRect {
    double t_lo = 0.0;
    double t_hi = 0.0;
    HyperRect rect;

    TimedRect() = default;
    TimedRect(double t0, double t1, HyperRect r) : t_lo(t0), t_hi(t1), rect(std::move(r)) {
        if (!(0.0 <= t_lo && t_lo <= t_hi)) {
            throw Error(ErrorCode::Eval, "invalid timed rect: requires 0 <= t_lo <= t_hi");
        }
    }

    bool operator==(const TimedRect& other) const = default;
};

}  // namespace versekit
