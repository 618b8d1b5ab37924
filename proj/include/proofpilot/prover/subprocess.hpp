#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace proofpilot::prover {

struct ProcessResult {
    int exit_code = -1;
    bool timed_out = false;
    bool spawn_failed = false;
    std::string out;
    std::string err;
};

// Runs argv[0] with the given arguments, captures stdout/stderr, and kills
// the process once the wall-clock ceiling is exceeded.
inline ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds) {
    ProcessResult result;
    if (argv.empty()) throw std::invalid_argument("empty argv");

    int out_pipe[2], err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0)
        throw std::runtime_error("pipe() failed: " + std::string(strerror(errno)));

    pid_t pid = fork();
    if (pid < 0) throw std::runtime_error("fork() failed: " + std::string(strerror(errno)));

    if (pid == 0) {
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }

    close(out_pipe[1]);
    close(err_pipe[1]);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    auto deadline = std::chrono::steady_clock::now() +
                    std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                        std::chrono::duration<double>(timeout_seconds));

    struct pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
    bool open_fd[2] = {true, true};
    char buffer[4096];

    while (open_fd[0] || open_fd[1]) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                             deadline - std::chrono::steady_clock::now())
                             .count();
        if (remaining <= 0) {
            result.timed_out = true;
            kill(pid, SIGKILL);
            break;
        }
        fds[0].events = open_fd[0] ? POLLIN : 0;
        fds[1].events = open_fd[1] ? POLLIN : 0;
        int rc = poll(fds, 2, static_cast<int>(std::min<long long>(remaining, 1000)));
        if (rc < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (!open_fd[i]) continue;
            if (fds[i].revents & (POLLIN | POLLHUP)) {
                ssize_t n;
                while ((n = read(fds[i].fd, buffer, sizeof(buffer))) > 0)
                    (i == 0 ? result.out : result.err).append(buffer, static_cast<size_t>(n));
                if (n == 0) open_fd[i] = false;
            }
            if ((fds[i].revents & (POLLERR | POLLNVAL)) && !(fds[i].revents & POLLIN))
                open_fd[i] = false;
        }
    }

    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
        if (result.exit_code == 127 && result.out.empty() && result.err.empty())
            result.spawn_failed = true;
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

// True when the executable can be spawned at all (PATH lookup included).
inline bool executable_available(const std::string& path) {
    if (path.empty()) return false;
    ProcessResult r = run_process({"/bin/sh", "-c", "command -v '" + path + "' >/dev/null 2>&1"},
                                  10.0);
    return r.exit_code == 0;
}

}  // namespace proofpilot::prover
