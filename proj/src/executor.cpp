#include "pmc/executor.hpp"

#include <stdexcept>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmc {

void SerialExecutor::run(std::size_t n_tasks,
                         const std::function<void(std::size_t)>& task) const {
  for (std::size_t i = 0; i < n_tasks; ++i) task(i);
}

OpenMpExecutor::OpenMpExecutor(int workers) : workers_(workers) {
  if (workers_ <= 0)
    workers_ = int(std::max(1u, std::thread::hardware_concurrency()));
}

void OpenMpExecutor::run(std::size_t n_tasks,
                         const std::function<void(std::size_t)>& task) const {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers_)
  for (std::size_t i = 0; i < n_tasks; ++i) task(i);
#else
  for (std::size_t i = 0; i < n_tasks; ++i) task(i);
#endif
}

std::unique_ptr<Executor> make_executor(const std::string& name, int workers) {
  if (name == "serial") return std::make_unique<SerialExecutor>();
  if (name == "openmp") return std::make_unique<OpenMpExecutor>(workers);
  throw std::invalid_argument("unknown executor '" + name + "'");
}

}  // namespace pmc
