#include "vesselforge/backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <mutex>

#include "vesselforge/psp.hpp"

namespace vesselforge {

namespace {

class IdentityBackend final : public SynthBackend {
 public:
  Volume process(const Volume& patch, int, std::uint64_t) override { return patch; }
  std::string describe() const override { return "identity"; }
};

class AnalyticBackend final : public SynthBackend {
 public:
  explicit AnalyticBackend(const BuiltinParams& p) : mask_(*p.mask), delta_(p.delta_hu) {}

  Volume process(const Volume& patch, int, std::uint64_t patch_id) override {
    if (patch.spacing() != mask_.spacing()) throw BackendError(patch_id, "analytic: patch spacing differs from mask");
    Index3 at;
    for (int a = 0; a < 3; ++a) {
      const double off = (patch.origin()[a] - mask_.origin()[a]) / mask_.spacing()[a];
      at[a] = static_cast<std::int64_t>(std::llround(off));
    }
    try {
      check_window(mask_.dims(), at, patch.dims());
    } catch (const GeometryError& e) {
      throw BackendError(patch_id, std::string("analytic: patch lies outside the mask: ") + e.what());
    }
    Volume out = patch;
    const Dims& d = patch.dims();
    for (std::int64_t z = 0; z < d.nz; ++z)
      for (std::int64_t y = 0; y < d.ny; ++y)
        for (std::int64_t x = 0; x < d.nx; ++x) {
          const std::uint8_t l = mask_.at(at.x + x, at.y + y, at.z + z);
          if (l != 0) out.at(x, y, z) += delta_[l];
        }
    return out;
  }
  std::string describe() const override { return "analytic"; }

 private:
  LabelMask mask_;
  std::array<float, 256> delta_;
};

std::string errno_text(int err) { return std::strerror(err); }

// One child process with non-blocking pipes on the parent side.
class Child {
 public:
  Child(const std::vector<std::string>& argv, std::chrono::milliseconds timeout) : timeout_(timeout) {
    int in_pipe[2], out_pipe[2], status_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) != 0 || pipe2(out_pipe, O_CLOEXEC) != 0 || pipe2(status_pipe, O_CLOEXEC) != 0) {
      throw DataError("process backend: pipe failed: " + errno_text(errno));
    }
    std::vector<char*> cargv;
    for (const auto& s : argv) cargv.push_back(const_cast<char*>(s.c_str()));
    cargv.push_back(nullptr);

    pid_ = fork();
    if (pid_ < 0) throw DataError("process backend: fork failed: " + errno_text(errno));
    if (pid_ == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      execvp(cargv[0], cargv.data());
      const int err = errno;
      [[maybe_unused]] auto n = write(status_pipe[1], &err, sizeof err);
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(status_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    int err = 0;
    ssize_t n;
    do {
      n = read(status_pipe[0], &err, sizeof err);
    } while (n < 0 && errno == EINTR);
    close(status_pipe[0]);
    if (n > 0) {
      waitpid(pid_, nullptr, 0);
      pid_ = -1;
      close(to_child_);
      close(from_child_);
      throw DataError("process backend: cannot spawn \"" + argv[0] + "\": " + errno_text(err));
    }
    fcntl(to_child_, F_SETFL, fcntl(to_child_, F_GETFL) | O_NONBLOCK);
    fcntl(from_child_, F_SETFL, fcntl(from_child_, F_GETFL) | O_NONBLOCK);
  }

  Child(const Child&) = delete;
  Child& operator=(const Child&) = delete;

  ~Child() {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    if (pid_ > 0) {
      for (int i = 0; i < 50; ++i) {
        if (waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        usleep(10000);
      }
      kill(pid_, SIGKILL);
      waitpid(pid_, nullptr, 0);
    }
  }

  Volume exchange(const Volume& patch, int stage, std::uint64_t id) {
    if (broken_) throw BackendError(id, "process backend: child is unusable after an earlier protocol failure");
    try {
      return exchange_impl(patch, stage, id);
    } catch (const BackendError&) {
      throw;
    } catch (const Error& e) {
      broken_ = true;
      throw BackendError(id, e.what());
    }
  }

 private:
  Volume exchange_impl(const Volume& patch, int stage, std::uint64_t id) {
    PspRequest req;
    req.id = id;
    req.stage = stage;
    req.dims = patch.dims();
    req.spacing = patch.spacing();
    req.payload.assign(patch.values().begin(), patch.values().end());
    write_all(encode_request(req));

    const PspResponse resp = read_response([this](std::uint8_t* buf, std::size_t n) { return read_some(buf, n); },
                                           patch.size());
    if (resp.id != id) {
      throw ProtocolError("psp: response id " + std::to_string(resp.id) + " does not match request id " +
                          std::to_string(id));
    }
    if (!resp.ok) throw BackendError(id, "backend reported error: " + resp.message.value_or("(no message)"));
    Volume out(patch.geometry(), resp.payload);
    return out;
  }

  void wait_for(int fd, short events, const char* what) {
    pollfd p{fd, events, 0};
    for (;;) {
      const int r = poll(&p, 1, static_cast<int>(timeout_.count()));
      if (r > 0) return;
      if (r == 0) throw ProtocolError(std::string("psp: timed out waiting to ") + what + " the child");
      if (errno != EINTR) throw ProtocolError("psp: poll failed: " + errno_text(errno));
    }
  }

  void write_all(const std::vector<std::uint8_t>& bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
      const ssize_t n = write(to_child_, bytes.data() + done, bytes.size() - done);
      if (n > 0) {
        done += static_cast<std::size_t>(n);
      } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
        wait_for(to_child_, POLLOUT, "write to");
      } else if (n < 0 && errno == EINTR) {
        continue;
      } else {
        throw ProtocolError("psp: child exited or closed its input (" + errno_text(errno) + ")");
      }
    }
  }

  std::size_t read_some(std::uint8_t* buf, std::size_t len) {
    for (;;) {
      const ssize_t n = read(from_child_, buf, len);
      if (n >= 0) return static_cast<std::size_t>(n);
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        wait_for(from_child_, POLLIN, "read from");
      } else if (errno != EINTR) {
        throw ProtocolError("psp: read from child failed: " + errno_text(errno));
      }
    }
  }

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool broken_ = false;
  std::chrono::milliseconds timeout_;
};

class ProcessBackend final : public SynthBackend {
 public:
  ProcessBackend(const std::vector<std::string>& argv, const ProcessBackendOptions& opt) : argv_(argv) {
    if (argv.empty()) throw InvalidArgument("process backend: empty command");
    static std::once_flag sigpipe_once;
    std::call_once(sigpipe_once, [] { signal(SIGPIPE, SIG_IGN); });
    for (unsigned i = 0; i < std::max(1u, opt.instances); ++i) {
      children_.push_back(std::make_unique<Child>(argv, opt.timeout));
      idle_.push_back(children_.back().get());
    }
  }

  Volume process(const Volume& patch, int stage, std::uint64_t patch_id) override {
    Child* child = acquire();
    struct Release {
      ProcessBackend* self;
      Child* child;
      ~Release() { self->release(child); }
    } release{this, child};
    return child->exchange(patch, stage, patch_id);
  }

  std::string describe() const override {
    std::string s = "cmd:";
    for (std::size_t i = 0; i < argv_.size(); ++i) s += (i ? " " : "") + argv_[i];
    return s;
  }

 private:
  Child* acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !idle_.empty(); });
    Child* c = idle_.back();
    idle_.pop_back();
    return c;
  }
  void release(Child* c) {
    {
      std::lock_guard lock(mutex_);
      idle_.push_back(c);
    }
    cv_.notify_one();
  }

  std::vector<std::string> argv_;
  std::vector<std::unique_ptr<Child>> children_;
  std::vector<Child*> idle_;
  std::mutex mutex_;
  std::condition_variable cv_;
};

}  // namespace

std::unique_ptr<SynthBackend> builtin_backend(std::string_view kind, const BuiltinParams& params) {
  if (kind == "identity") return std::make_unique<IdentityBackend>();
  if (kind == "analytic") {
    if (!params.mask) throw InvalidArgument("analytic backend requires a vessel mask");
    return std::make_unique<AnalyticBackend>(params);
  }
  throw InvalidArgument("unknown builtin backend \"" + std::string(kind) + "\" (expected identity or analytic)");
}

BuiltinParams analytic_params(LabelMask mask, float artery_delta_hu, float vein_delta_hu) {
  BuiltinParams p;
  p.mask = std::move(mask);
  p.delta_hu[labels::kArtery] = artery_delta_hu;
  p.delta_hu[labels::kVein] = vein_delta_hu;
  return p;
}

std::unique_ptr<SynthBackend> process_backend(const std::vector<std::string>& argv,
                                              const ProcessBackendOptions& options) {
  return std::make_unique<ProcessBackend>(argv, options);
}

}  // namespace vesselforge
