#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace mrflow {

/// Truncated multivariate Taylor polynomial in NV variables up to total degree D.
///
/// Coefficient c_alpha stores (d^alpha f)(x0) / alpha!, so arithmetic on these
/// objects propagates exact partial derivatives of closed-form expressions.
/// Monomials are ordered by total degree, then lexicographically.
template <int NV, int D>
class Taylor {
public:
    static constexpr int kVars = NV;
    static constexpr int kDegree = D;
    static constexpr std::size_t kSize = [] {
        std::size_t num = 1;
        std::size_t den = 1;
        for (int k = 1; k <= D; ++k) {
            num *= static_cast<std::size_t>(NV + k);
            den *= static_cast<std::size_t>(k);
        }
        return num / den;
    }();

    using Exponent = std::array<int, NV>;

    Taylor() = default;

    // Constant.
    Taylor(double value) { c_[0] = value; }  // NOLINT(google-explicit-constructor)

    /// Independent variable `var` expanded about `x0`.
    static Taylor variable(int var, double x0) {
        Taylor out(x0);
        Exponent e{};
        e[static_cast<std::size_t>(var)] = 1;
        out.c_[index_of(e)] = 1.0;
        return out;
    }

    [[nodiscard]] double value() const { return c_[0]; }
    [[nodiscard]] double coeff(std::size_t k) const { return c_[k]; }

    /// Partial derivative d^alpha f evaluated at the expansion point.
    [[nodiscard]] double derivative(const Exponent& alpha) const {
        double fact = 1.0;
        for (int a : alpha) {
            for (int k = 2; k <= a; ++k) fact *= k;
        }
        return fact * c_[index_of(alpha)];
    }

    Taylor& operator+=(const Taylor& o) {
        for (std::size_t k = 0; k < kSize; ++k) c_[k] += o.c_[k];
        return *this;
    }
    Taylor& operator-=(const Taylor& o) {
        for (std::size_t k = 0; k < kSize; ++k) c_[k] -= o.c_[k];
        return *this;
    }
    Taylor& operator*=(double s) {
        for (auto& v : c_) v *= s;
        return *this;
    }
    Taylor& operator*=(const Taylor& o) {
        *this = *this * o;
        return *this;
    }

    friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
    friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
    friend Taylor operator-(Taylor a) { return a *= -1.0; }
    friend Taylor operator*(Taylor a, double s) { return a *= s; }
    friend Taylor operator*(double s, Taylor a) { return a *= s; }

    friend Taylor operator*(const Taylor& a, const Taylor& b) {
        Taylor out;
        out.c_[0] = 0.0;
        for (const auto& p : tables().products) out.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
        return out;
    }

    /// f(a) for a scalar function with derivatives d[m] = f^(m)(a(x0)), m = 0..D.
    [[nodiscard]] Taylor compose(const std::array<double, D + 1>& d) const {
        Taylor shift = *this;
        shift.c_[0] = 0.0;
        double fact = 1.0;
        for (int m = 2; m <= D; ++m) fact *= m;
        Taylor out(d[D] / fact);
        for (int m = D - 1; m >= 0; --m) {
            fact /= (m + 1);
            out = out * shift;
            out.c_[0] += d[static_cast<std::size_t>(m)] / fact;
        }
        return out;
    }

    friend Taylor sin(const Taylor& a) {
        std::array<double, D + 1> d{};
        const double s = std::sin(a.c_[0]);
        const double c = std::cos(a.c_[0]);
        for (int m = 0; m <= D; ++m) {
            switch (m % 4) {
                case 0: d[m] = s; break;
                case 1: d[m] = c; break;
                case 2: d[m] = -s; break;
                default: d[m] = -c; break;
            }
        }
        return a.compose(d);
    }

    friend Taylor cos(const Taylor& a) {
        std::array<double, D + 1> d{};
        const double s = std::sin(a.c_[0]);
        const double c = std::cos(a.c_[0]);
        for (int m = 0; m <= D; ++m) {
            switch (m % 4) {
                case 0: d[m] = c; break;
                case 1: d[m] = -s; break;
                case 2: d[m] = -c; break;
                default: d[m] = s; break;
            }
        }
        return a.compose(d);
    }

    friend Taylor exp(const Taylor& a) {
        std::array<double, D + 1> d{};
        d.fill(std::exp(a.c_[0]));
        return a.compose(d);
    }

    static std::size_t index_of(const Exponent& e) { return tables().lookup[code(e)]; }

    static const Exponent& exponent(std::size_t k) { return tables().exponents[k]; }

private:
    struct Product {
        std::size_t out;
        std::size_t lhs;
        std::size_t rhs;
    };
    struct Tables {
        std::array<Exponent, kSize> exponents{};
        std::vector<Product> products;
        std::vector<std::size_t> lookup;  // code(e) -> monomial index
    };

    static std::size_t code(const Exponent& e) {
        std::size_t c = 0;
        for (int v = NV - 1; v >= 0; --v) c = c * (D + 1) + static_cast<std::size_t>(e[static_cast<std::size_t>(v)]);
        return c;
    }

    static int degree(const Exponent& e) {
        int s = 0;
        for (int v : e) s += v;
        return s;
    }

    static Tables build() {
        Tables t;
        std::size_t k = 0;
        for (int deg = 0; deg <= D; ++deg) {
            Exponent e{};
            // Enumerate all exponents with total degree `deg` in lexicographic order.
            auto rec = [&](auto&& self, int var, int left) -> void {
                if (var == NV - 1) {
                    e[static_cast<std::size_t>(var)] = left;
                    t.exponents[k++] = e;
                    return;
                }
                for (int a = left; a >= 0; --a) {
                    e[static_cast<std::size_t>(var)] = a;
                    self(self, var + 1, left - a);
                }
            };
            rec(rec, 0, deg);
        }
        std::size_t span = 1;
        for (int v = 0; v < NV; ++v) span *= (D + 1);
        t.lookup.assign(span, kSize);
        for (std::size_t i = 0; i < kSize; ++i) t.lookup[code(t.exponents[i])] = i;
        for (std::size_t i = 0; i < kSize; ++i) {
            for (std::size_t j = 0; j < kSize; ++j) {
                if (degree(t.exponents[i]) + degree(t.exponents[j]) > D) continue;
                Exponent sum{};
                for (std::size_t v = 0; v < NV; ++v) sum[v] = t.exponents[i][v] + t.exponents[j][v];
                for (std::size_t o = 0; o < kSize; ++o) {
                    if (t.exponents[o] == sum) {
                        t.products.push_back({o, i, j});
                        break;
                    }
                }
            }
        }
        return t;
    }

    static const Tables& tables() {
        static const Tables t = build();
        return t;
    }

    std::array<double, kSize> c_{};
};

}  // namespace mrflow
