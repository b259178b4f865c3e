#include "grushin/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace grushin::fft {

namespace {

// FFTW planning is not thread-safe; plans are created once under a lock and
// executed through the new-array interface, which is.
class PlanCache {
public:
    fftw_plan get(int n, int howmany, int sign) {
        std::lock_guard lock(mutex_);
        auto key = std::make_tuple(n, howmany, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<cplx> scratch(static_cast<std::size_t>(n) * howmany);
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan plan = fftw_plan_many_dft(1, &n, howmany, buf, nullptr, 1, n, buf, nullptr, 1, n, sign,
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("FFTW planning failed");
        plans_.emplace(key, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

void run(std::span<cplx> data, int n, int howmany, int sign) {
    if (n <= 0 || howmany <= 0) return;
    if (data.size() != static_cast<std::size_t>(n) * howmany) {
        throw std::invalid_argument("fft: buffer size does not match n * howmany");
    }
    fftw_plan plan = cache().get(n, howmany, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward(std::span<cplx> data) { run(data, static_cast<int>(data.size()), 1, FFTW_FORWARD); }
void backward(std::span<cplx> data) { run(data, static_cast<int>(data.size()), 1, FFTW_BACKWARD); }
void forward_batch(std::span<cplx> data, int n, int howmany) { run(data, n, howmany, FFTW_FORWARD); }
void backward_batch(std::span<cplx> data, int n, int howmany) { run(data, n, howmany, FFTW_BACKWARD); }

}  // namespace grushin::fft
