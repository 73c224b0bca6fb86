#include "fft.hpp"

#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace pnbound::detail {
namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard lock(mu_);
        auto it = plans_.find({n, sign});
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n));
        auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
        fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(std::make_pair(n, sign), p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

} // namespace

void dft_inplace(std::complex<double>* data, int n, int sign) {
    if (n <= 1) return;
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(cache().get(n, sign), buf, buf);
}

} // namespace pnbound::detail
