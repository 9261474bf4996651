#pragma once

#include <functional>
#include <memory>
#include <string>

namespace pmc {

/// Execution interface for per-subspace tasks. Tasks share only immutable
/// inputs and write to disjoint slots, so any backend that runs each index
/// exactly once yields identical results.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual std::string name() const = 0;
  virtual int workers() const = 0;
  virtual void run(std::size_t n_tasks,
                   const std::function<void(std::size_t)>& task) const = 0;
};

/// Reference backend: runs tasks in index order on the calling thread.
class SerialExecutor : public Executor {
 public:
  std::string name() const override { return "serial"; }
  int workers() const override { return 1; }
  void run(std::size_t n_tasks,
           const std::function<void(std::size_t)>& task) const override;
};

/// OpenMP pool with at most `workers` tasks in flight. Falls back to
/// serial execution when OpenMP is unavailable.
class OpenMpExecutor : public Executor {
 public:
  explicit OpenMpExecutor(int workers);
  std::string name() const override { return "openmp"; }
  int workers() const override { return workers_; }
  void run(std::size_t n_tasks,
           const std::function<void(std::size_t)>& task) const override;

 private:
  int workers_;
};

std::unique_ptr<Executor> make_executor(const std::string& name, int workers);

}  // namespace pmc
