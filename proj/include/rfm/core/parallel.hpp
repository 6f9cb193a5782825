#pragma once

#include <exception>

namespace rfm {

/// Keeps the first exception thrown by loop bodies inside an OpenMP region,
/// where exceptions must not escape, and rethrows it afterwards.
class FirstError {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(rfm_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace rfm
