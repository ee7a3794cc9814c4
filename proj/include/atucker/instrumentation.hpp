#pragma once

#include <atomic>
#include <cstddef>
#include <mutex>

namespace atucker::instr {

/// Counters for the GEMM layer. Every matrix-matrix product issued by the
/// kernels or the linalg backend bumps `calls` by one and `flops` by its
/// cost-model charge (2*m*n*k for general products, m*n*k for the symmetric
/// self-product in gram, which follows the rank-k update convention).
struct GemmCounters {
    std::atomic<long long> calls{0};
    std::atomic<long long> flops{0};
};

inline GemmCounters& gemm_counters() {
    static GemmCounters c;
    return c;
}

inline void reset_gemm_counters() {
    gemm_counters().calls.store(0);
    gemm_counters().flops.store(0);
}

inline void record_gemm(long long flop_charge) {
    gemm_counters().calls.fetch_add(1, std::memory_order_relaxed);
    gemm_counters().flops.fetch_add(flop_charge, std::memory_order_relaxed);
}

inline long long gemm_calls() { return gemm_counters().calls.load(); }
inline long long gemm_flops() { return gemm_counters().flops.load(); }

/// Tracks live payload buffers of DenseTensor/DenseMatrix while enabled.
/// Buffers allocated before enable() are invisible, which lets tests watch
/// exactly the allocations made by the operation under scrutiny.
class AllocTracker {
public:
    struct Ticket {
        unsigned long epoch = 0;
        std::size_t elems = 0;
        bool active = false;
    };

    struct Stats {
        long long alloc_count = 0;     // registered allocations
        long long live_elems = 0;      // currently live tracked elements
        long long peak_elems = 0;      // high-water mark of live elements
        long long live_watched = 0;    // live buffers with exactly watch_elems elements
        long long peak_watched = 0;    // high-water mark of the above
    };

    static AllocTracker& instance() {
        static AllocTracker t;
        return t;
    }

    void enable(std::size_t watch_elems) {
        std::lock_guard<std::mutex> lock(mutex_);
        enabled_ = true;
        ++epoch_;
        watch_ = watch_elems;
        stats_ = Stats{};
    }

    void disable() {
        std::lock_guard<std::mutex> lock(mutex_);
        enabled_ = false;
    }

    Ticket on_alloc(std::size_t elems) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!enabled_ || elems == 0) return {};
        stats_.alloc_count += 1;
        stats_.live_elems += static_cast<long long>(elems);
        if (stats_.live_elems > stats_.peak_elems) stats_.peak_elems = stats_.live_elems;
        if (elems == watch_) {
            stats_.live_watched += 1;
            if (stats_.live_watched > stats_.peak_watched) stats_.peak_watched = stats_.live_watched;
        }
        return Ticket{epoch_, elems, true};
    }

    void on_free(const Ticket& t) {
        if (!t.active) return;
        std::lock_guard<std::mutex> lock(mutex_);
        if (t.epoch != epoch_) return;  // allocation outlived its tracking scope
        stats_.live_elems -= static_cast<long long>(t.elems);
        if (t.elems == watch_) stats_.live_watched -= 1;
    }

    Stats stats() {
        std::lock_guard<std::mutex> lock(mutex_);
        return stats_;
    }

private:
    std::mutex mutex_;
    bool enabled_ = false;
    unsigned long epoch_ = 0;
    std::size_t watch_ = 0;
    Stats stats_;
};

/// RAII handle owned by a tracked buffer; transfers on move. Owning
/// containers re-register copies themselves (the source may predate the
/// tracking scope, so its ticket says nothing about the copy).
class AllocToken {
public:
    AllocToken() = default;
    explicit AllocToken(std::size_t elems) : ticket_(AllocTracker::instance().on_alloc(elems)) {}
    AllocToken(const AllocToken&) = delete;
    AllocToken(AllocToken&& other) noexcept : ticket_(other.ticket_) { other.ticket_ = {}; }
    AllocToken& operator=(const AllocToken&) = delete;
    AllocToken& operator=(AllocToken&& other) noexcept {
        if (this != &other) {
            release();
            ticket_ = other.ticket_;
            other.ticket_ = {};
        }
        return *this;
    }
    ~AllocToken() { release(); }

    void reset(std::size_t elems) {
        release();
        ticket_ = AllocTracker::instance().on_alloc(elems);
    }

private:
    void release() {
        if (ticket_.active) {
            AllocTracker::instance().on_free(ticket_);
            ticket_ = {};
        }
    }

    AllocTracker::Ticket ticket_;
};

/// Scoped enable/disable of allocation tracking.
struct AllocScope {
    explicit AllocScope(std::size_t watch_elems) { AllocTracker::instance().enable(watch_elems); }
    ~AllocScope() { AllocTracker::instance().disable(); }
    AllocScope(const AllocScope&) = delete;
    AllocScope& operator=(const AllocScope&) = delete;
    AllocTracker::Stats stats() const { return AllocTracker::instance().stats(); }
};

}  // namespace atucker::instr
