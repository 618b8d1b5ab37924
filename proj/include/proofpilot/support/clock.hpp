#pragma once

#include <chrono>
#include <mutex>

namespace proofpilot::support {

// Monotonic time source. Injected everywhere a duration is measured so that
// fully mocked runs produce identical reports on every execution.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now_seconds() = 0;
};

class RealClock final : public Clock {
public:
    double now_seconds() override {
        auto t = std::chrono::steady_clock::now().time_since_epoch();
        return std::chrono::duration<double>(t).count();
    }
};

// Advances by a fixed tick on every read.
class FakeClock final : public Clock {
public:
    explicit FakeClock(double tick_seconds = 0.001) : tick_(tick_seconds) {}

    double now_seconds() override {
        std::lock_guard<std::mutex> lock(mu_);
        now_ += tick_;
        return now_;
    }

private:
    std::mutex mu_;
    double now_ = 0.0;
    double tick_;
};

inline RealClock& default_clock() {
    static RealClock clock;
    return clock;
}

}  // namespace proofpilot::support
