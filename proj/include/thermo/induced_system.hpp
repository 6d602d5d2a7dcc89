#ifndef THERMO_INDUCED_SYSTEM_HPP
#define THERMO_INDUCED_SYSTEM_HPP

#include <algorithm>
#include <compare>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "interval_map.hpp"
#include "numerics.hpp"

namespace thermo {

enum class WordKind { Short, ParabolicBlock };

using LetterPair = std::pair<int, int>;

struct InducedWord {
    std::vector<int> letters;
    int return_time = 1;
    WordKind kind = WordKind::Short;

    LetterPair head() const { return {letters[0], letters[1]}; }
    LetterPair tail() const { return {letters[letters.size() - 2], letters.back()}; }
    // Letters whose inverse branches map the target state interval onto the cylinder.
    std::vector<int> prefix() const { return {letters.begin(), letters.begin() + return_time}; }
    int block_symbol() const { return kind == WordKind::ParabolicBlock ? letters[1] : -1; }

    std::string label() const {
        std::string s;
        for (std::size_t k = 0; k < letters.size(); ++k) {
            if (k) s += '.';
            s += std::to_string(letters[k]);
        }
        return s;
    }

    // canonical order: return time, then lexicographic
    friend bool operator<(const InducedWord& a, const InducedWord& b) {
        if (a.return_time != b.return_time) return a.return_time < b.return_time;
        return a.letters < b.letters;
    }
    friend bool operator==(const InducedWord& a, const InducedWord& b) { return a.letters == b.letters; }
};

inline InducedWord make_word(std::vector<int> letters) {
    if (letters.size() < 3) throw Error(ErrorKind::InvalidParameter, "induced words have at least three letters");
    InducedWord w;
    w.return_time = static_cast<int>(letters.size()) - 2;
    w.kind = w.return_time == 1 ? WordKind::Short : WordKind::ParabolicBlock;
    w.letters = std::move(letters);
    return w;
}

inline bool is_legal(const InducedWord& w, const MapModel& m) {
    const auto& l = w.letters;
    const int ne = m.alphabet_size();
    for (int a : l)
        if (a < 0 || a >= ne) return false;
    if (static_cast<int>(l.size()) != w.return_time + 2) return false;
    if (w.return_time == 1) {
        if (m.is_parabolic(l[0]) && l[1] == l[0]) return false;
        if (m.is_parabolic(l[1]) && l[2] == l[1]) return false;
        return true;
    }
    int i = l[1];
    if (!m.is_parabolic(i)) return false;
    for (int k = 1; k <= w.return_time; ++k)
        if (l[k] != i) return false;
    return l.front() != i && l.back() != i;
}

class TruncatedAlphabet {
public:
    TruncatedAlphabet() = default;
    TruncatedAlphabet(int n_max, std::vector<InducedWord> words) : n_max_(n_max), words_(std::move(words)) {
        std::sort(words_.begin(), words_.end());
        for (const auto& w : words_) {
            state_id(w.head());
            state_id(w.tail());
        }
        std::sort(states_.begin(), states_.end());
        index_.clear();
        for (std::size_t t = 0; t < states_.size(); ++t) index_[states_[t]] = static_cast<int>(t);
        by_source_.assign(states_.size(), {});
        for (std::size_t w = 0; w < words_.size(); ++w) {
            src_.push_back(index_.at(words_[w].head()));
            dst_.push_back(index_.at(words_[w].tail()));
            by_source_[src_.back()].push_back(static_cast<int>(w));
            lookup_[words_[w].letters] = static_cast<int>(w);
        }
    }

    int n_max() const { return n_max_; }
    int size() const { return static_cast<int>(words_.size()); }
    const std::vector<InducedWord>& words() const { return words_; }
    const InducedWord& word(int w) const { return words_.at(w); }

    int n_states() const { return static_cast<int>(states_.size()); }
    LetterPair state(int t) const { return states_.at(t); }
    int state_index(LetterPair p) const {
        auto it = index_.find(p);
        return it == index_.end() ? -1 : it->second;
    }
    int source(int w) const { return src_.at(w); }
    int target(int w) const { return dst_.at(w); }
    const std::vector<int>& words_from(int state) const { return by_source_.at(state); }
    const std::vector<int>& successors(int w) const { return by_source_.at(dst_.at(w)); }

    std::optional<int> index_of(const InducedWord& w) const {
        auto it = lookup_.find(w.letters);
        if (it == lookup_.end()) return std::nullopt;
        return it->second;
    }

private:
    void state_id(LetterPair p) {
        if (std::find(states_.begin(), states_.end(), p) == states_.end()) states_.push_back(p);
    }

    int n_max_ = 0;
    std::vector<InducedWord> words_;
    std::vector<LetterPair> states_;
    std::map<LetterPair, int> index_;
    std::vector<int> src_, dst_;
    std::vector<std::vector<int>> by_source_;
    std::map<std::vector<int>, int> lookup_;
};

inline TruncatedAlphabet enumerate_words(const MapModel& m, int n_max) {
    if (n_max < 1) throw Error(ErrorKind::InvalidParameter, "n_max must be at least 1");
    const int ne = m.alphabet_size();
    std::vector<InducedWord> words;
    for (int a = 0; a < ne; ++a)
        for (int b = 0; b < ne; ++b)
            for (int c = 0; c < ne; ++c) {
                InducedWord w = make_word({a, b, c});
                if (is_legal(w, m)) words.push_back(w);
            }
    for (int n = 2; n <= n_max; ++n)
        for (int i : m.parabolic())
            for (int j = 0; j < ne; ++j) {
                if (j == i) continue;
                for (int k = 0; k < ne; ++k) {
                    if (k == i) continue;
                    std::vector<int> l(n + 2, i);
                    l.front() = j;
                    l.back() = k;
                    words.push_back(make_word(std::move(l)));
                }
            }
    return TruncatedAlphabet(n_max, std::move(words));
}

inline std::vector<InducedWord> successors(const InducedWord& w, const TruncatedAlphabet& alphabet) {
    std::vector<InducedWord> out;
    int t = alphabet.state_index(w.tail());
    if (t < 0) return out;
    for (int v : alphabet.words_from(t)) out.push_back(alphabet.word(v));
    return out;
}

inline double lambda_q(const PotentialSpec& phi, double q) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [i, a] : phi.parabolic_values) best = std::max(best, -q * a);
    return best;
}

// ---------------------------------------------------------------------------
// Cylinders

struct Cylinder {
    InducedWord word;
    Interval interval;
    int r = 1;
    Interval phi_bar;
    Interval log_deriv;
    double distortion = 0.0;
    // depth >= 1: brackets on the two-symbol cylinders [w w'], w' in successor order
    std::vector<Interval> phi_bar_by_successor;
    std::vector<Interval> log_deriv_by_successor;
};

// A piece of a state interval at a given refinement depth; label is the
// successor position of the enclosing one-symbol cylinder, or -1 for gaps.
struct Piece {
    Interval span;
    int label = -1;
};

inline Interval cylinder_interval(const MapModel& m, const InducedWord& w) {
    Interval base = state_interval(m, w.tail().first, w.tail().second);
    auto pre = w.prefix();
    double u = pull_back(m, nullptr, pre, base.lo).point;
    double v = pull_back(m, nullptr, pre, base.hi).point;
    return Interval::hull(u, v);
}

namespace detail {

inline void append_with_gaps(std::vector<Piece>& out, std::vector<Piece> cyl, Interval whole) {
    std::sort(cyl.begin(), cyl.end(), [](const Piece& a, const Piece& b) { return a.span.lo < b.span.lo; });
    double cursor = whole.lo;
    for (const auto& p : cyl) {
        if (p.span.lo > cursor) out.push_back({{cursor, p.span.lo}, -1});
        out.push_back(p);
        cursor = std::max(cursor, p.span.hi);
    }
    if (cursor < whole.hi) out.push_back({{cursor, whole.hi}, -1});
}

}  // namespace detail

// Partition of the state interval of `state` into successor cylinders (and gaps) to the given depth.
inline std::vector<Piece> state_partition(const MapModel& m, const TruncatedAlphabet& A, int state, int depth) {
    LetterPair st = A.state(state);
    Interval whole = state_interval(m, st.first, st.second);
    std::vector<Piece> out;
    if (depth <= 0) {
        out.push_back({whole, -1});
        return out;
    }
    const auto& succ = A.words_from(state);
    std::vector<Piece> cyl;
    for (std::size_t pos = 0; pos < succ.size(); ++pos) {
        const InducedWord& w = A.word(succ[pos]);
        if (depth == 1) {
            cyl.push_back({cylinder_interval(m, w), static_cast<int>(pos)});
            continue;
        }
        auto inner = state_partition(m, A, A.target(succ[pos]), depth - 1);
        auto pre = w.prefix();
        for (const auto& p : inner) {
            double u = pull_back(m, nullptr, pre, p.span.lo).point;
            double v = pull_back(m, nullptr, pre, p.span.hi).point;
            cyl.push_back({Interval::hull(u, v), static_cast<int>(pos)});
        }
    }
    detail::append_with_gaps(out, std::move(cyl), whole);
    return out;
}

namespace detail {

// Three sample points per piece: lo, mid, hi.
inline std::vector<double> piece_points(const std::vector<Piece>& pieces) {
    std::vector<double> ys;
    ys.reserve(3 * pieces.size());
    for (const auto& p : pieces) {
        ys.push_back(p.span.lo);
        ys.push_back(p.span.mid());
        ys.push_back(p.span.hi);
    }
    return ys;
}

// Hull of endpoint and midpoint values, widened by the midpoint second difference.
inline Interval piece_bracket(double a, double m, double b) {
    Interval iv = Interval::hull(a, b);
    iv.include(m);
    return iv.widened(0.5 * std::abs(a + b - 2.0 * m));
}

struct WordSamples {
    std::vector<double> log_deriv;
    std::vector<double> phi_bar;
};

inline void fill_brackets(Cylinder& c, const WordSamples& coarse, const WordSamples& fine,
                          const std::vector<Piece>& pieces, int n_successors, int depth) {
    c.log_deriv = piece_bracket(coarse.log_deriv[0], coarse.log_deriv[1], coarse.log_deriv[2]);
    c.phi_bar = piece_bracket(coarse.phi_bar[0], coarse.phi_bar[1], coarse.phi_bar[2]);
    if (depth >= 1) {
        const double inf = std::numeric_limits<double>::infinity();
        Interval none{inf, -inf};
        Interval ld = none, ph = none;
        c.log_deriv_by_successor.assign(n_successors, none);
        c.phi_bar_by_successor.assign(n_successors, none);
        for (std::size_t p = 0; p < pieces.size(); ++p) {
            Interval l = piece_bracket(fine.log_deriv[3 * p], fine.log_deriv[3 * p + 1], fine.log_deriv[3 * p + 2]);
            Interval f = piece_bracket(fine.phi_bar[3 * p], fine.phi_bar[3 * p + 1], fine.phi_bar[3 * p + 2]);
            ld.include(l);
            ph.include(f);
            if (pieces[p].label >= 0) {
                c.log_deriv_by_successor[pieces[p].label].include(l);
                c.phi_bar_by_successor[pieces[p].label].include(f);
            }
        }
        // refinement never loosens a bracket
        c.log_deriv = c.log_deriv.intersect(ld);
        c.phi_bar = c.phi_bar.intersect(ph);
        for (int s = 0; s < n_successors; ++s) {
            c.log_deriv_by_successor[s] = c.log_deriv_by_successor[s].intersect(c.log_deriv);
            c.phi_bar_by_successor[s] = c.phi_bar_by_successor[s].intersect(c.phi_bar);
        }
    }
    c.distortion = std::max(c.log_deriv.width(), c.phi_bar.width());
}

}  // namespace detail

// Single-cylinder bracket computation by direct pullbacks. When no alphabet is
// given, subdivision uses the return-time cap max(64, r).
inline Cylinder cylinder_data(const InducedWord& w, const MapModel& m, const PotentialSpec& phi, int depth,
                              const TruncatedAlphabet* alphabet = nullptr) {
    if (!is_legal(w, m)) throw Error(ErrorKind::InvalidParameter, "word " + w.label() + " is not grammar-legal");
    if (depth < 0) throw Error(ErrorKind::InvalidParameter, "depth must be non-negative");
    TruncatedAlphabet local;
    if (!alphabet) {
        local = enumerate_words(m, std::max(64, w.return_time));
        alphabet = &local;
    }
    const int t = alphabet->state_index(w.tail());
    Cylinder c;
    c.word = w;
    c.r = w.return_time;
    c.interval = cylinder_interval(m, w);
    auto pre = w.prefix();
    auto sample = [&](const std::vector<double>& ys) {
        detail::WordSamples s;
        for (double y : ys) {
            OrbitSums o = pull_back(m, &phi, pre, y);
            s.log_deriv.push_back(o.log_deriv);
            s.phi_bar.push_back(o.phi_sum);
        }
        return s;
    };
    auto coarse_pieces = state_partition(m, *alphabet, t, 0);
    auto fine_pieces = depth >= 1 ? state_partition(m, *alphabet, t, depth) : coarse_pieces;
    auto coarse = sample(detail::piece_points(coarse_pieces));
    auto fine = depth >= 1 ? sample(detail::piece_points(fine_pieces)) : coarse;
    detail::fill_brackets(c, coarse, fine, fine_pieces, static_cast<int>(alphabet->words_from(t).size()), depth);
    return c;
}

struct CylinderTable {
    int n_max = 0;
    int depth = 0;
    std::vector<Cylinder> cylinders;
};

// All cylinders of the alphabet; parabolic families j i^n k are swept in n at
// each sample point so the cost is linear in n_max per point.
inline CylinderTable build_cylinder_table(const TruncatedAlphabet& A, const MapModel& m, const PotentialSpec& phi,
                                          int depth) {
    if (depth < 0) throw Error(ErrorKind::InvalidParameter, "depth must be non-negative");
    CylinderTable table;
    table.n_max = A.n_max();
    table.depth = depth;
    table.cylinders.resize(A.size());

    const int ns = A.n_states();
    std::vector<std::vector<Piece>> coarse_pieces(ns), fine_pieces(ns);
    std::vector<std::vector<double>> coarse_pts(ns), fine_pts(ns);
    for (int t = 0; t < ns; ++t) {
        coarse_pieces[t] = state_partition(m, A, t, 0);
        fine_pieces[t] = depth >= 1 ? state_partition(m, A, t, depth) : coarse_pieces[t];
        coarse_pts[t] = detail::piece_points(coarse_pieces[t]);
        fine_pts[t] = detail::piece_points(fine_pieces[t]);
    }

    // Short words and any word outside a family sweep.
    std::vector<bool> done(A.size(), false);
    std::map<std::pair<int, std::pair<int, int>>, std::vector<int>> families;  // (j, (i,k)) -> word ids by n
    for (int w = 0; w < A.size(); ++w) {
        const InducedWord& word = A.word(w);
        if (word.kind == WordKind::ParabolicBlock) {
            auto key = std::make_pair(word.letters.front(), std::make_pair(word.letters[1], word.letters.back()));
            auto& ids = families[key];
            if (static_cast<int>(ids.size()) < word.return_time + 1) ids.resize(word.return_time + 1, -1);
            ids[word.return_time] = w;
        }
    }
    auto finish = [&](int w, const detail::WordSamples& coarse, const detail::WordSamples& fine) {
        Cylinder& c = table.cylinders[w];
        c.word = A.word(w);
        c.r = c.word.return_time;
        c.interval = cylinder_interval(m, c.word);
        int t = A.target(w);
        detail::fill_brackets(c, coarse, fine, fine_pieces[t], static_cast<int>(A.words_from(t).size()), depth);
        done[w] = true;
    };

    for (int w = 0; w < A.size(); ++w) {
        const InducedWord& word = A.word(w);
        if (word.kind != WordKind::Short) continue;
        int t = A.target(w);
        auto sample = [&](const std::vector<double>& ys) {
            detail::WordSamples s;
            for (double y : ys) {
                OrbitSums o = pull_back(m, &phi, word.prefix(), y);
                s.log_deriv.push_back(o.log_deriv);
                s.phi_bar.push_back(o.phi_sum);
            }
            return s;
        };
        auto coarse = sample(coarse_pts[t]);
        auto fine = depth >= 1 ? sample(fine_pts[t]) : coarse;
        finish(w, coarse, fine);
    }

    for (const auto& [key, ids] : families) {
        const int j = key.first, i = key.second.first, k = key.second.second;
        const int t = A.state_index({i, k});
        const int nmax = static_cast<int>(ids.size()) - 1;
        std::vector<detail::WordSamples> coarse(nmax + 1), fine(nmax + 1);
        auto sweep = [&](const std::vector<double>& ys, std::vector<detail::WordSamples>& out) {
            for (double y : ys)
                family_sweep(m, &phi, j, i, y, nmax, [&](int n, const OrbitSums& o) {
                    out[n].log_deriv.push_back(o.log_deriv);
                    out[n].phi_bar.push_back(o.phi_sum);
                });
        };
        sweep(coarse_pts[t], coarse);
        if (depth >= 1)
            sweep(fine_pts[t], fine);
        else
            fine = coarse;
        for (int n = 2; n <= nmax; ++n)
            if (ids[n] >= 0) finish(ids[n], coarse[n], fine[n]);
    }
    for (int w = 0; w < A.size(); ++w)
        if (!done[w]) throw Error(ErrorKind::Structural, "cylinder table missed word " + A.word(w).label());
    return table;
}

// ---------------------------------------------------------------------------
// CSV export

inline void write_cylinder_csv(std::ostream& os, const CylinderTable& t) {
    os << "word,r,a,b,phi_lo,phi_hi,logd_lo,logd_hi,distortion\n";
    os << std::setprecision(17);
    for (const auto& c : t.cylinders) {
        os << c.word.label() << ',' << c.r << ',' << c.interval.lo << ',' << c.interval.hi << ',' << c.phi_bar.lo << ','
           << c.phi_bar.hi << ',' << c.log_deriv.lo << ',' << c.log_deriv.hi << ',' << c.distortion << '\n';
    }
}

inline std::vector<Cylinder> read_cylinder_csv(std::istream& is) {
    std::vector<Cylinder> out;
    std::string line;
    if (!std::getline(is, line)) return out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 9) throw Error(ErrorKind::Config, "cylinder CSV row with " + std::to_string(f.size()) + " fields");
        std::vector<int> letters;
        std::stringstream ls(f[0]);
        std::string tok;
        while (std::getline(ls, tok, '.')) letters.push_back(std::stoi(tok));
        Cylinder c;
        c.word = make_word(letters);
        c.r = std::stoi(f[1]);
        c.interval = {std::stod(f[2]), std::stod(f[3])};
        c.phi_bar = {std::stod(f[4]), std::stod(f[5])};
        c.log_deriv = {std::stod(f[6]), std::stod(f[7])};
        c.distortion = std::stod(f[8]);
        out.push_back(c);
    }
    return out;
}

}  // namespace thermo

#endif
