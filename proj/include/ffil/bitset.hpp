#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace ffil {

/// Fixed-length bitset sized at runtime. Ordered lexicographically by bit index
/// (bit 0 most significant) so it can key ordered containers.
class DynamicBitset {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    DynamicBitset() = default;
    explicit DynamicBitset(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

    std::size_t size() const noexcept { return size_; }

    void set(std::size_t i) noexcept { words_[i >> 6] |= bit(i); }
    void reset(std::size_t i) noexcept { words_[i >> 6] &= ~bit(i); }
    bool test(std::size_t i) const noexcept { return (words_[i >> 6] & bit(i)) != 0; }

    void set_all() noexcept {
        for (auto& w : words_) w = ~std::uint64_t{0};
        trim();
    }

    std::size_t count() const noexcept {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    bool none() const noexcept {
        for (auto w : words_)
            if (w != 0) return false;
        return true;
    }

    DynamicBitset& operator&=(const DynamicBitset& o) noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
        return *this;
    }
    DynamicBitset& operator|=(const DynamicBitset& o) noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
        return *this;
    }
    /// this &= ~o
    DynamicBitset& subtract(const DynamicBitset& o) noexcept {
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
        return *this;
    }

    friend DynamicBitset operator&(DynamicBitset a, const DynamicBitset& b) noexcept { return a &= b; }

    /// |a & b| without materializing the intersection.
    static std::size_t and_count(const DynamicBitset& a, const DynamicBitset& b) noexcept {
        std::size_t c = 0;
        for (std::size_t i = 0; i < a.words_.size(); ++i)
            c += static_cast<std::size_t>(std::popcount(a.words_[i] & b.words_[i]));
        return c;
    }

    std::size_t find_first() const noexcept { return find_from(0); }
    std::size_t find_next(std::size_t i) const noexcept { return find_from(i + 1); }

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        for (auto i = find_first(); i != npos; i = find_next(i)) out.push_back(i);
        return out;
    }

    friend bool operator==(const DynamicBitset&, const DynamicBitset&) = default;

    friend bool operator<(const DynamicBitset& a, const DynamicBitset& b) noexcept {
        if (a.size_ != b.size_) return a.size_ < b.size_;
        for (std::size_t i = 0; i < a.words_.size(); ++i) {
            if (a.words_[i] == b.words_[i]) continue;
            // first differing bit decides; a set bit sorts after an unset one
            const std::uint64_t diff = a.words_[i] ^ b.words_[i];
            const std::uint64_t lowest = diff & (~diff + 1);
            return (b.words_[i] & lowest) != 0;
        }
        return false;
    }

    std::string to_string() const {
        std::string s(size_, '0');
        for (std::size_t i = 0; i < size_; ++i)
            if (test(i)) s[i] = '1';
        return s;
    }

private:
    static constexpr std::uint64_t bit(std::size_t i) noexcept { return std::uint64_t{1} << (i & 63); }

    void trim() noexcept {
        if (size_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }

    std::size_t find_from(std::size_t i) const noexcept {
        if (i >= size_) return npos;
        std::size_t w = i >> 6;
        std::uint64_t word = words_[w] & (~std::uint64_t{0} << (i & 63));
        while (true) {
            if (word != 0) return (w << 6) + static_cast<std::size_t>(std::countr_zero(word));
            if (++w >= words_.size()) return npos;
            word = words_[w];
        }
    }

    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace ffil
