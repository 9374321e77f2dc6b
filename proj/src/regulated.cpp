#include "stieltjes/regulated.hpp"

#include "stieltjes/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace stieltjes {

namespace {

// (1-s)*a + s*b returns b exactly at s == 1, which keeps left limits at nodes
// bit-equal to the stored values.
double lerp(double a, double b, double s) { return (1.0 - s) * a + s * b; }

template <class Better>
RegulatedGrid envelope(std::span<const RegulatedGrid> fs, Better better)
{
    if (fs.empty()) throw DomainMismatch("envelope of an empty family");
    for (const auto& f : fs) {
        if (f.size() == 0) throw DomainMismatch("empty grid in envelope");
        if (f.t0() != fs[0].t0() || f.t1() != fs[0].t1())
            throw DomainMismatch("grids in an envelope must share their domain");
    }
    if (fs.size() == 1) return fs[0];

    const std::vector<double> merged = merge_nodes(fs);
    const bool all_sampled = std::all_of(fs.begin(), fs.end(), [](const auto& f) { return f.has_sampler(); });

    auto pick = [&](auto&& read) {
        double best = read(fs[0]);
        for (std::size_t k = 1; k < fs.size(); ++k) {
            const double v = read(fs[k]);
            if (better(v, best)) best = v;
        }
        return best;
    };

    std::vector<double> nodes;
    nodes.reserve(merged.size());
    nodes.push_back(merged.front());
    for (std::size_t c = 0; c + 1 < merged.size(); ++c) {
        const double a = merged[c];
        const double b = merged[c + 1];
        if (!all_sampled) {
            std::vector<double> crossings;
            for (std::size_t i = 0; i < fs.size(); ++i) {
                const double li = fs[i].right_limit(a);
                const double ri = fs[i](b);
                for (std::size_t j = i + 1; j < fs.size(); ++j) {
                    const double da = li - fs[j].right_limit(a);
                    const double db = ri - fs[j](b);
                    if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
                        const double s = da / (da - db);
                        const double t = a + s * (b - a);
                        if (t > a && t < b) crossings.push_back(t);
                    }
                }
            }
            std::sort(crossings.begin(), crossings.end());
            crossings.erase(std::unique(crossings.begin(), crossings.end()), crossings.end());
            for (double t : crossings) {
                if (t > nodes.back()) nodes.push_back(t);
            }
        }
        if (b > nodes.back()) nodes.push_back(b);
    }

    std::vector<double> values(nodes.size());
    std::vector<double> posts(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double t = nodes[j];
        values[j] = pick([t](const RegulatedGrid& f) { return f(t); });
        posts[j] = j + 1 == nodes.size() ? values[j] : pick([t](const RegulatedGrid& f) { return f.right_limit(t); });
    }

    RegulatedGrid::Sampler sampler;
    if (all_sampled) {
        std::vector<RegulatedGrid::Sampler> samplers;
        for (const auto& f : fs) samplers.push_back(f.sampler());
        sampler = [samplers, better](double t) {
            double best = samplers[0](t);
            for (std::size_t k = 1; k < samplers.size(); ++k) {
                const double v = samplers[k](t);
                if (better(v, best)) best = v;
            }
            return best;
        };
    }
    return RegulatedGrid::from_posts(std::move(nodes), std::move(values), std::move(posts), std::move(sampler));
}

} // namespace

RegulatedGrid RegulatedGrid::from_posts(std::vector<double> nodes, std::vector<double> values,
                                        std::vector<double> posts, Sampler interior)
{
    if (nodes.size() != values.size() || nodes.size() != posts.size())
        throw InvalidGrid("nodes, values and posts must have equal length");
    RegulatedGrid g;
    g.jumps_.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) g.jumps_[j] = posts[j] - values[j];
    g.nodes_ = std::move(nodes);
    g.values_ = std::move(values);
    g.posts_ = std::move(posts);
    g.interior_ = std::move(interior);
    g.validate();
    return g;
}

RegulatedGrid RegulatedGrid::from_jumps(std::vector<double> nodes, std::vector<double> values,
                                        std::vector<double> jumps, Sampler interior)
{
    if (nodes.size() != values.size() || nodes.size() != jumps.size())
        throw InvalidGrid("nodes, values and jumps must have equal length");
    RegulatedGrid g;
    g.posts_.resize(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) g.posts_[j] = values[j] + jumps[j];
    g.nodes_ = std::move(nodes);
    g.values_ = std::move(values);
    g.jumps_ = std::move(jumps);
    g.interior_ = std::move(interior);
    g.validate();
    return g;
}

RegulatedGrid RegulatedGrid::continuous(std::vector<double> nodes, std::vector<double> values, Sampler interior)
{
    std::vector<double> jumps(values.size(), 0.0);
    return from_jumps(std::move(nodes), std::move(values), std::move(jumps), std::move(interior));
}

RegulatedGrid RegulatedGrid::sample(const std::function<double(double)>& fn, std::vector<double> nodes,
                                    bool keep_sampler)
{
    std::vector<double> values(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) values[j] = fn(nodes[j]);
    return continuous(std::move(nodes), std::move(values), keep_sampler ? Sampler(fn) : Sampler{});
}

RegulatedGrid RegulatedGrid::constant(double c, std::vector<double> nodes)
{
    std::vector<double> values(nodes.size(), c);
    return continuous(std::move(nodes), std::move(values));
}

void RegulatedGrid::validate() const
{
    if (nodes_.empty()) throw InvalidGrid("grid needs at least one node");
    for (std::size_t j = 1; j < nodes_.size(); ++j) {
        if (!(nodes_[j] > nodes_[j - 1])) throw InvalidGrid("grid nodes must be strictly increasing");
    }
    if (jumps_.back() != 0.0 || posts_.back() != values_.back())
        throw InvalidGrid("the right limit at the last node must equal its value");
}

std::optional<std::size_t> RegulatedGrid::node_index(double t) const
{
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    if (it != nodes_.end() && *it == t) return static_cast<std::size_t>(it - nodes_.begin());
    return std::nullopt;
}

double RegulatedGrid::interior(std::size_t cell, double t) const
{
    if (interior_) return interior_(t);
    const double a = nodes_[cell];
    const double b = nodes_[cell + 1];
    return lerp(posts_[cell], values_[cell + 1], (t - a) / (b - a));
}

double RegulatedGrid::operator()(double t) const
{
    if (!contains(t)) throw OutOfDomain(t);
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    const auto j = static_cast<std::size_t>(it - nodes_.begin());
    if (*it == t) return values_[j];
    return interior(j - 1, t);
}

double RegulatedGrid::right_limit(double t) const
{
    if (!contains(t)) throw OutOfDomain(t);
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    const auto j = static_cast<std::size_t>(it - nodes_.begin());
    if (*it == t) return posts_[j];
    return interior(j - 1, t);
}

double RegulatedGrid::left_limit(double t) const
{
    if (!contains(t)) throw OutOfDomain(t);
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    const auto j = static_cast<std::size_t>(it - nodes_.begin());
    if (*it == t) {
        if (j == 0) return values_[0];
        // Limit of the cell interior at its right end.
        if (interior_) return values_[j];
        return lerp(posts_[j - 1], values_[j], 1.0);
    }
    return interior(j - 1, t);
}

RegulatedGrid RegulatedGrid::without_sampler() const
{
    RegulatedGrid g = *this;
    g.interior_ = {};
    return g;
}

double delta_plus(const RegulatedGrid& f, double t)
{
    if (!f.contains(t)) throw OutOfDomain(t);
    if (const auto j = f.node_index(t)) return f.jumps()[*j];
    return 0.0;
}

double delta_minus(const RegulatedGrid& f, double t) { return f(t) - f.left_limit(t); }

double sample_oscillation(const RegulatedGrid& f, double a, double b)
{
    double lo = f.right_limit(a);
    double hi = lo;
    auto take = [&](double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    const auto nodes = f.nodes();
    auto it = std::upper_bound(nodes.begin(), nodes.end(), a);
    for (; it != nodes.end() && *it < b; ++it) {
        const auto j = static_cast<std::size_t>(it - nodes.begin());
        take(f.values()[j]);
        take(f.posts()[j]);
    }
    take(f(b));
    return hi - lo;
}

std::vector<double> eps_division(const RegulatedGrid& f, double eps)
{
    if (!(eps > 0.0)) throw DomainError("eps_division needs eps > 0");
    const auto t = f.nodes();
    const auto value = f.values();
    const auto post = f.posts();
    const std::size_t m = t.size() - 1;

    std::vector<double> division{t[0]};
    if (m == 0) return division;

    std::size_t start = 0;
    double lo = post[0];
    double hi = post[0];
    std::size_t k = 1;
    while (k <= m) {
        const double nlo = std::min(lo, value[k]);
        const double nhi = std::max(hi, value[k]);
        if (nhi - nlo < eps) {
            if (k == m) {
                division.push_back(t[m]);
                break;
            }
            const double plo = std::min(nlo, post[k]);
            const double phi = std::max(nhi, post[k]);
            if (phi - plo < eps) {
                lo = plo;
                hi = phi;
            } else {
                division.push_back(t[k]);
                start = k;
                lo = hi = post[k];
            }
            ++k;
        } else if (start + 1 == k) {
            // One grid cell oscillates too much: split it evenly.
            const double range = std::fabs(value[k] - post[k - 1]);
            const auto pieces = static_cast<std::size_t>(std::floor(range / eps)) + 1;
            for (std::size_t p = 1; p < pieces; ++p) {
                const double s = static_cast<double>(p) / static_cast<double>(pieces);
                const double tp = t[k - 1] + s * (t[k] - t[k - 1]);
                if (tp > division.back() && tp < t[k]) division.push_back(tp);
            }
            division.push_back(t[k]);
            if (k == m) break;
            start = k;
            lo = hi = post[k];
            ++k;
        } else {
            division.push_back(t[k - 1]);
            start = k - 1;
            lo = hi = post[k - 1];
        }
    }
    return division;
}

std::vector<double> merge_nodes(std::span<const RegulatedGrid> fs)
{
    std::vector<double> out;
    for (const auto& f : fs) out.insert(out.end(), f.nodes().begin(), f.nodes().end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

RegulatedGrid pointwise_sup(std::span<const RegulatedGrid> fs)
{
    return envelope(fs, [](double a, double b) { return a > b; });
}

RegulatedGrid pointwise_inf(std::span<const RegulatedGrid> fs)
{
    return envelope(fs, [](double a, double b) { return a < b; });
}

bool approx_equal(const RegulatedGrid& a, const RegulatedGrid& b, double tol)
{
    if (a.size() == 0 || b.size() == 0) return a.size() == b.size();
    if (std::fabs(a.t0() - b.t0()) > tol || std::fabs(a.t1() - b.t1()) > tol) return false;
    const std::array<RegulatedGrid, 2> pair{a, b};
    const auto nodes = merge_nodes(pair);
    const double lo = std::max(a.t0(), b.t0());
    const double hi = std::min(a.t1(), b.t1());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double t = nodes[j];
        if (t < lo || t > hi) continue;
        if (std::fabs(a(t) - b(t)) > tol) return false;
        if (std::fabs(a.right_limit(t) - b.right_limit(t)) > tol) return false;
        if (j + 1 < nodes.size()) {
            const double mid = 0.5 * (t + nodes[j + 1]);
            if (mid > lo && mid < hi && std::fabs(a(mid) - b(mid)) > tol) return false;
        }
    }
    return true;
}

std::string format_number(double x)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

void write_csv(std::ostream& os, const RegulatedGrid& f)
{
    os << "t,value,post\n";
    for (std::size_t j = 0; j < f.size(); ++j) {
        os << format_number(f.nodes()[j]) << ',' << format_number(f.values()[j]) << ','
           << format_number(f.posts()[j]) << '\n';
    }
}

RegulatedGrid read_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw InvalidGrid("empty CSV");
    std::vector<double> nodes;
    std::vector<double> values;
    std::vector<double> posts;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 3> cols{};
        std::size_t col = 0;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',') && col < 3) {
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            const auto [ptr, ec] = std::from_chars(first, last, cols[col]);
            if (ec != std::errc{} || ptr != last)
                throw InvalidGrid("CSV row " + std::to_string(row) + ": malformed number '" + cell + "'");
            ++col;
        }
        if (col < 2) throw InvalidGrid("CSV row " + std::to_string(row) + ": expected t,value[,post]");
        if (col == 2) cols[2] = cols[1];
        nodes.push_back(cols[0]);
        values.push_back(cols[1]);
        posts.push_back(cols[2]);
    }
    return RegulatedGrid::from_posts(std::move(nodes), std::move(values), std::move(posts));
}

} // namespace stieltjes
