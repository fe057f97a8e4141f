#pragma once

#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "mhpolicy/random.hpp"

namespace mhpolicy {

/// Fixed-capacity FIFO store. Once full, each push overwrites the oldest entry.
template <class T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
        entries_.reserve(capacity);
    }

    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

    void push(T item) {
        if (entries_.size() < capacity_) {
            entries_.push_back(std::move(item));
            return;
        }
        entries_[head_] = std::move(item);
        head_ = (head_ + 1) % capacity_;
    }

    void clear() noexcept {
        entries_.clear();
        head_ = 0;
    }

    /// Entry `i` in insertion order, 0 being the oldest still held.
    const T& operator[](std::size_t i) const { return entries_[(head_ + i) % entries_.size()]; }

    /// k distinct entries chosen uniformly at random (partial Fisher-Yates).
    std::vector<T> sample(std::size_t k, Rng& rng) const {
        if (k > entries_.size()) throw std::invalid_argument("ReplayBuffer::sample: k exceeds buffer length");
        std::vector<std::size_t> index(entries_.size());
        std::iota(index.begin(), index.end(), std::size_t{0});
        std::vector<T> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, index.size() - 1);
            std::swap(index[i], index[pick(rng)]);
            out.push_back(entries_[index[i]]);
        }
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<T> entries_;
};

template <class T>
void buffer_push(ReplayBuffer<T>& buffer, T sample) {
    buffer.push(std::move(sample));
}

template <class T>
std::vector<T> buffer_sample(const ReplayBuffer<T>& buffer, std::size_t k, Rng& rng) {
    return buffer.sample(k, rng);
}

} // namespace mhpolicy
