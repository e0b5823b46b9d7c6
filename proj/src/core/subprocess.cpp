#include "core/subprocess.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "core/error.hpp"

namespace umic {

std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : command) {
        if (c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

SubprocessResult run_subprocess(const std::vector<std::string>& argv) {
    require(!argv.empty(), ErrKind::invalid_argument, "empty command");

    int errpipe[2];
    require(pipe(errpipe) == 0, ErrKind::codec, "pipe() failed");

    pid_t pid = fork();
    require(pid >= 0, ErrKind::codec, "fork() failed");

    if (pid == 0) {
        close(errpipe[0]);
        dup2(errpipe[1], STDERR_FILENO);
        close(errpipe[1]);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        execvp(args[0], args.data());
        // exec failed; report through the pipe
        const char* msg = strerror(errno);
        (void)!write(STDERR_FILENO, "exec failed: ", 13);
        (void)!write(STDERR_FILENO, msg, strlen(msg));
        _exit(127);
    }

    close(errpipe[1]);
    SubprocessResult res;
    char buf[1024];
    ssize_t n;
    while ((n = read(errpipe[0], buf, sizeof buf)) > 0)
        res.stderr_text.append(buf, size_t(n));
    close(errpipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status))
        res.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        res.exit_code = 128 + WTERMSIG(status);
    return res;
}

}  // namespace umic
