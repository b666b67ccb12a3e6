#pragma once

#include <cstdint>
#include <vector>

#include "setplan/error.hpp"

namespace setplan {

using ImageId = std::int32_t;

// Dense bitset over a gallery of images indexed [0, universe_size).
// All set algebra is word-parallel and exact; two sets must share the
// same universe size to be combined.
class CandidateSet {
public:
    CandidateSet() = default;
    explicit CandidateSet(int universe_size)
        : size_(universe_size), words_((static_cast<std::size_t>(universe_size) + 63) / 64, 0) {
        if (universe_size < 0) throw Error(ErrorKind::Data, "negative universe size");
    }

    static CandidateSet of(int universe_size, std::initializer_list<ImageId> ids) {
        CandidateSet s(universe_size);
        for (ImageId id : ids) s.insert(id);
        return s;
    }

    int universe_size() const { return size_; }

    void insert(ImageId id) {
        check(id);
        words_[static_cast<std::size_t>(id) >> 6] |= (std::uint64_t{1} << (id & 63));
    }
    void erase(ImageId id) {
        check(id);
        words_[static_cast<std::size_t>(id) >> 6] &= ~(std::uint64_t{1} << (id & 63));
    }
    bool contains(ImageId id) const {
        if (id < 0 || id >= size_) return false;
        return (words_[static_cast<std::size_t>(id) >> 6] >> (id & 63)) & 1;
    }

    int count() const {
        int n = 0;
        for (std::uint64_t w : words_) n += __builtin_popcountll(w);
        return n;
    }
    bool empty() const {
        for (std::uint64_t w : words_) {
            if (w != 0) return false;
        }
        return true;
    }

    CandidateSet& operator|=(const CandidateSet& o) {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    CandidateSet& operator&=(const CandidateSet& o) {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    // Set difference: keep elements not in o.
    CandidateSet& operator-=(const CandidateSet& o) {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }

    friend CandidateSet operator|(CandidateSet a, const CandidateSet& b) { return a |= b; }
    friend CandidateSet operator&(CandidateSet a, const CandidateSet& b) { return a &= b; }
    friend CandidateSet operator-(CandidateSet a, const CandidateSet& b) { return a -= b; }

    // Relative complement within the declared universe.
    CandidateSet complement() const {
        CandidateSet r(size_);
        for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
        r.trim();
        return r;
    }

    bool subset_of(const CandidateSet& o) const {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & ~o.words_[i]) return false;
        }
        return true;
    }
    bool intersects(const CandidateSet& o) const {
        check_same(o);
        for (std::size_t i = 0; i < words_.size(); ++i) {
            if (words_[i] & o.words_[i]) return true;
        }
        return false;
    }
    int intersect_count(const CandidateSet& o) const {
        check_same(o);
        int n = 0;
        for (std::size_t i = 0; i < words_.size(); ++i)
            n += __builtin_popcountll(words_[i] & o.words_[i]);
        return n;
    }

    bool operator==(const CandidateSet& o) const {
        return size_ == o.size_ && words_ == o.words_;
    }
    bool operator!=(const CandidateSet& o) const { return !(*this == o); }

    std::vector<ImageId> to_vector() const {
        std::vector<ImageId> out;
        out.reserve(static_cast<std::size_t>(count()));
        for_each([&](ImageId id) { out.push_back(id); });
        return out;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t wi = 0; wi < words_.size(); ++wi) {
            std::uint64_t w = words_[wi];
            while (w) {
                int bit = __builtin_ctzll(w);
                fn(static_cast<ImageId>(wi * 64 + static_cast<std::size_t>(bit)));
                w &= w - 1;
            }
        }
    }

private:
    void check(ImageId id) const {
        if (id < 0 || id >= size_)
            throw Error(ErrorKind::Data, "image id out of gallery range: " + std::to_string(id));
    }
    void check_same(const CandidateSet& o) const {
        if (size_ != o.size_)
            throw Error(ErrorKind::Data, "candidate sets over different galleries");
    }
    void trim() {
        if (size_ % 64 != 0 && !words_.empty())
            words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    int size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace setplan
