#include <fcntl.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <thread>

#include "idiomspace/errors.hpp"
#include "idiomspace/providers.hpp"

namespace idiomspace::providers {

namespace {

std::string errno_text(const std::string& what) {
  return what + ": " + std::strerror(errno);
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}
  ~FdTransport() override {
    close_write();
    if (read_fd_ >= 0 && read_fd_ != write_fd_) ::close(read_fd_);
  }

  void write_line(std::string_view line) override {
    std::lock_guard lock(write_mutex_);
    if (write_fd_ < 0) throw TransportError("write on a closed channel");
    std::string buf(line);
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::write(write_fd_, buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_text("provider write failed"));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<std::string> read_line() override {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      if (eof_) {
        if (buffer_.empty()) return std::nullopt;
        std::string line = std::move(buffer_);
        buffer_.clear();
        return line;
      }
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(errno_text("provider read failed"));
      }
      if (n == 0) {
        eof_ = true;
        continue;
      }
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  void close_write() override {
    std::lock_guard lock(write_mutex_);
    if (write_fd_ < 0) return;
    if (write_fd_ == read_fd_) {
      ::shutdown(write_fd_, SHUT_WR);
    } else {
      ::close(write_fd_);
    }
    write_fd_ = -1;
  }

 protected:
  int read_fd_;
  int write_fd_;
  std::mutex write_mutex_;
  std::string buffer_;
  bool eof_ = false;
};

class SocketTransport final : public FdTransport {
 public:
  explicit SocketTransport(int fd) : FdTransport(fd, fd) {}
  ~SocketTransport() override {
    close_write();
    ::close(read_fd_);
    read_fd_ = -1;
  }
};

class SubprocessTransport final : public FdTransport {
 public:
  SubprocessTransport(int read_fd, int write_fd, pid_t pid) : FdTransport(read_fd, write_fd), pid_(pid) {}
  ~SubprocessTransport() override {
    close_write();
    int status = 0;
    while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
    }
  }

 private:
  pid_t pid_;
};

sockaddr_un unix_address(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof addr.sun_path) throw ConfigError("socket path too long: " + path);
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  return addr;
}

}  // namespace

std::unique_ptr<Transport> fd_transport(int read_fd, int write_fd) {
  ignore_sigpipe();
  return std::make_unique<FdTransport>(read_fd, write_fd);
}

std::unique_ptr<Transport> spawn_subprocess(const std::string& command) {
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw TransportError(errno_text("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw TransportError(errno_text("pipe"));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(errno_text("fork"));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<SubprocessTransport>(from_child[0], to_child[1], pid);
}

std::unique_ptr<Transport> connect_unix_socket(const std::string& path) {
  ignore_sigpipe();
  const int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw TransportError(errno_text("socket"));
  const auto addr = unix_address(path);
  if (::connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = errno_text("cannot connect to provider socket " + path);
    ::close(fd);
    throw TransportError(msg);
  }
  return std::make_unique<SocketTransport>(fd);
}

void serve_unix_socket(Provider& provider, const std::string& path, std::size_t max_connections) {
  ignore_sigpipe();
  const int listener = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listener < 0) throw TransportError(errno_text("socket"));
  const auto addr = unix_address(path);
  ::unlink(path.c_str());
  if (::bind(listener, reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listener, 16) != 0) {
    const std::string msg = errno_text("cannot listen on " + path);
    ::close(listener);
    throw TransportError(msg);
  }
  std::vector<std::thread> workers;
  for (std::size_t served = 0; max_connections == 0 || served < max_connections; ++served) {
    const int fd = ::accept4(listener, nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) {
      if (errno == EINTR) {
        --served;
        continue;
      }
      break;
    }
    workers.emplace_back([&provider, fd] {
      SocketTransport t(fd);
      try {
        serve(provider, t);
      } catch (const std::exception&) {
        // Client went away mid-session.
      }
    });
  }
  for (auto& w : workers) w.join();
  ::close(listener);
  ::unlink(path.c_str());
}

}  // namespace idiomspace::providers
