#pragma once

#include <array>
#include <atomic>
#include <cstdint>

namespace motionsynth {

/// Single-producer / single-consumer "latest wins" slot built on a triple
/// buffer. The producer fills back_slot() and publishes it; the consumer
/// picks up the newest published value. Unread values are overwritten.
/// Neither side locks or allocates (beyond whatever T's copy does).
template <class T>
class LatestMailbox {
public:
    LatestMailbox() = default;
    LatestMailbox(const LatestMailbox&) = delete;
    LatestMailbox& operator=(const LatestMailbox&) = delete;

    // Producer side.
    T& back_slot() noexcept { return slots_[back_]; }

    void publish() noexcept
    {
        const auto prev = middle_.exchange(static_cast<std::uint8_t>(back_ | kFresh),
                                           std::memory_order_acq_rel);
        back_ = prev & kIndexMask;
        if (prev & kFresh) overwritten_.fetch_add(1, std::memory_order_relaxed);
        published_.fetch_add(1, std::memory_order_release);
        published_.notify_one();
    }

    void publish(const T& value)
    {
        back_slot() = value;
        publish();
    }

    // Consumer side. Returns nullptr when nothing new was published since the
    // last call; otherwise the pointer stays valid until the next take().
    const T* take() noexcept
    {
        if (!(middle_.load(std::memory_order_acquire) & kFresh)) return nullptr;
        const auto prev = middle_.exchange(front_, std::memory_order_acq_rel);
        front_ = prev & kIndexMask;
        return &slots_[front_];
    }

    /// Blocks until the publish counter moves past `seen`. Returns the new count.
    std::uint64_t wait_past(std::uint64_t seen) const noexcept
    {
        published_.wait(seen, std::memory_order_acquire);
        return published_.load(std::memory_order_acquire);
    }

    /// Wakes a consumer blocked in wait_past without publishing a value.
    void interrupt() noexcept
    {
        published_.fetch_add(1, std::memory_order_release);
        published_.notify_all();
    }

    [[nodiscard]] std::uint64_t published_count() const noexcept
    {
        return published_.load(std::memory_order_acquire);
    }
    [[nodiscard]] std::uint64_t overwritten_count() const noexcept
    {
        return overwritten_.load(std::memory_order_relaxed);
    }

private:
    static constexpr std::uint8_t kIndexMask = 0x3;
    static constexpr std::uint8_t kFresh = 0x4;

    std::array<T, 3> slots_{};
    std::uint8_t back_ = 0;
    std::uint8_t front_ = 2;
    std::atomic<std::uint8_t> middle_{1};
    std::atomic<std::uint64_t> published_{0};
    std::atomic<std::uint64_t> overwritten_{0};
};

}  // namespace motionsynth
