#include "vcprobe/external_adapter.hpp"

#include <charconv>
#include <csignal>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "vcprobe/error.hpp"

extern char** environ;

namespace vcprobe {

namespace {

constexpr std::size_t kDiagnosticLimit = 4096;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string encode_request(const Dataset& train, const Dataset& query, std::uint64_t seed) {
    std::string s;
    s += "TRAIN " + std::to_string(train.size()) + ' ' + std::to_string(train.dimension()) + ' ' +
         std::to_string(seed) + '\n';
    for (std::size_t i = 0; i < train.size(); ++i) {
        for (double x : train.features(i)) s += format_double(x) + ',';
        s += train.label(i) ? "1\n" : "0\n";
    }
    s += "PREDICT " + std::to_string(query.size()) + '\n';
    for (std::size_t i = 0; i < query.size(); ++i) {
        const auto row = query.features(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) s += ',';
            s += format_double(row[j]);
        }
        s += '\n';
    }
    return s;
}

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Fd& operator=(Fd&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }

    int get() const noexcept { return fd_; }
    explicit operator bool() const noexcept { return fd_ >= 0; }
    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

struct Pipe {
    Fd read;
    Fd write;
};

Pipe make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw AdapterError(std::string("pipe2 failed: ") + std::strerror(errno));
    return {Fd(fds[0]), Fd(fds[1])};
}

void ignore_sigpipe() {
    static std::once_flag once;
    std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

struct ChildOutput {
    std::string out;
    std::string err;
    int status = 0;
};

std::string truncate(const std::string& s) {
    return s.size() <= kDiagnosticLimit ? s : s.substr(0, kDiagnosticLimit) + "...[truncated]";
}

std::string diagnostics_of(const ChildOutput& c) {
    return "stderr:\n" + truncate(c.err) + "\nstdout:\n" + truncate(c.out);
}

ChildOutput run_child(const AdapterCommand& command, const std::string& input) {
    if (command.argv.empty()) throw AdapterError("external classifier command is empty");
    ignore_sigpipe();

    Pipe in = make_pipe();
    Pipe out = make_pipe();
    Pipe err = make_pipe();

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.read.get(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.write.get(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.write.get(), STDERR_FILENO);

    std::vector<char*> argv;
    for (const auto& a : command.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_t pid = 0;
    const int rc = ::posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        throw AdapterError("failed to launch '" + command.argv[0] + "': " + std::strerror(rc));

    in.read.reset();
    out.write.reset();
    err.write.reset();
    ::fcntl(in.write.get(), F_SETFL, ::fcntl(in.write.get(), F_GETFL) | O_NONBLOCK);

    const auto deadline = std::chrono::steady_clock::now() + command.timeout;
    ChildOutput result;
    std::size_t written = 0;
    if (input.empty()) in.write.reset();

    auto kill_and_throw = [&](const std::string& why) {
        ::kill(pid, SIGKILL);
        int status = 0;
        ::waitpid(pid, &status, 0);
        throw AdapterError(why, diagnostics_of(result));
    };

    char buf[65536];
    while (out.read || err.read) {
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0)
            kill_and_throw("external classifier timed out after " + std::to_string(command.timeout.count()) + " ms");

        pollfd fds[3];
        nfds_t count = 0;
        int in_slot = -1, out_slot = -1, err_slot = -1;
        if (in.write) { in_slot = static_cast<int>(count); fds[count++] = {in.write.get(), POLLOUT, 0}; }
        if (out.read) { out_slot = static_cast<int>(count); fds[count++] = {out.read.get(), POLLIN, 0}; }
        if (err.read) { err_slot = static_cast<int>(count); fds[count++] = {err.read.get(), POLLIN, 0}; }

        const int ready = ::poll(fds, count, static_cast<int>(std::min<long long>(remaining.count(), 1'000'000)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            kill_and_throw(std::string("poll failed: ") + std::strerror(errno));
        }
        if (ready == 0) continue;

        if (in_slot >= 0 && fds[in_slot].revents) {
            if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
                in.write.reset();
            } else {
                const ssize_t n = ::write(in.write.get(), input.data() + written, input.size() - written);
                if (n > 0) {
                    written += static_cast<std::size_t>(n);
                    if (written == input.size()) in.write.reset();
                } else if (n < 0 && errno != EAGAIN && errno != EINTR) {
                    in.write.reset();  // child stopped reading; its reply decides the outcome
                }
            }
        }
        auto drain = [&](int slot, Fd& fd, std::string& sink) {
            if (slot < 0 || !fds[slot].revents) return;
            const ssize_t n = ::read(fd.get(), buf, sizeof buf);
            if (n > 0)
                sink.append(buf, static_cast<std::size_t>(n));
            else if (n == 0 || (errno != EAGAIN && errno != EINTR))
                fd.reset();
        };
        drain(out_slot, out.read, result.out);
        drain(err_slot, err.read, result.err);
    }
    in.write.reset();

    for (;;) {
        int status = 0;
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) {
            result.status = status;
            break;
        }
        if (r < 0 && errno != EINTR) throw AdapterError(std::string("waitpid failed: ") + std::strerror(errno));
        if (std::chrono::steady_clock::now() >= deadline)
            kill_and_throw("external classifier timed out after " + std::to_string(command.timeout.count()) + " ms");
        ::usleep(1000);
    }

    if (WIFSIGNALED(result.status))
        throw AdapterError("external classifier killed by signal " + std::to_string(WTERMSIG(result.status)),
                           diagnostics_of(result));
    if (!WIFEXITED(result.status) || WEXITSTATUS(result.status) != 0)
        throw AdapterError("external classifier exited with status " + std::to_string(WEXITSTATUS(result.status)),
                           diagnostics_of(result));
    return result;
}

std::vector<std::uint8_t> parse_reply(const ChildOutput& child, std::size_t expected) {
    std::vector<std::uint8_t> labels;
    labels.reserve(expected);
    std::istringstream lines(child.out);
    std::string line;
    bool done = false;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (done) {
            if (line.empty()) continue;
            throw AdapterError("protocol violation: output after OK", diagnostics_of(child));
        }
        if (line == "0" || line == "1") {
            labels.push_back(line == "1" ? 1 : 0);
        } else if (line == "OK") {
            done = true;
        } else {
            throw AdapterError("protocol violation: unexpected reply line '" + truncate(line) + "'",
                               diagnostics_of(child));
        }
    }
    if (!done) throw AdapterError("protocol violation: reply not terminated by OK", diagnostics_of(child));
    if (labels.size() != expected)
        throw AdapterError("protocol violation: expected " + std::to_string(expected) + " labels, got " +
                               std::to_string(labels.size()),
                           diagnostics_of(child));
    return labels;
}

class ExternalModel final : public TrainedModel {
public:
    ExternalModel(AdapterCommand command, Dataset train, std::uint64_t seed)
        : command_(std::move(command)), train_(std::move(train)), seed_(seed) {}

    std::size_t dimension() const noexcept override { return train_.dimension(); }

    std::uint8_t predict(std::span<const double> features) const override {
        Dataset one(train_.dimension());
        one.add(features, 0);
        return predict_all(one).front();
    }

    std::vector<std::uint8_t> predict_all(const Dataset& data) const override {
        return external_adapter_fit_predict(command_, train_, data, seed_);
    }

    std::vector<double> parameters() const override {
        std::vector<double> out(train_.feature_data().begin(), train_.feature_data().end());
        out.insert(out.end(), train_.labels().begin(), train_.labels().end());
        out.push_back(static_cast<double>(seed_));
        return out;
    }

private:
    AdapterCommand command_;
    Dataset train_;
    std::uint64_t seed_;
};

}  // namespace

std::vector<std::uint8_t> external_adapter_fit_predict(const AdapterCommand& command, const Dataset& train,
                                                       const Dataset& query, std::uint64_t seed) {
    if (train.empty()) throw DomainError("external classifier needs a nonempty training block");
    if (query.dimension() != train.dimension())
        throw DomainError("query dimension does not match training dimension");
    const auto child = run_child(command, encode_request(train, query, seed));
    return parse_reply(child, query.size());
}

ExternalFamily::ExternalFamily(AdapterCommand command) : command_(std::move(command)) {
    if (command_.argv.empty()) throw ConfigError("external classifier command is empty");
    if (command_.timeout.count() <= 0) throw ConfigError("external classifier timeout must be positive");
}

std::unique_ptr<TrainedModel> ExternalFamily::fit(const Dataset& data, std::uint64_t seed) const {
    return std::make_unique<ExternalModel>(command_, data, seed);
}

FamilyDescriptor ExternalFamily::descriptor() const {
    return {"external", {{"timeout_ms", static_cast<double>(command_.timeout.count())}}};
}

// ---------------------------------------------------------------------------
// Server side

namespace {

bool parse_row(std::string_view line, std::size_t fields, std::vector<double>& out) {
    out.clear();
    for (std::size_t f = 0; f < fields; ++f) {
        const auto comma = line.find(',');
        const bool last = f + 1 == fields;
        if (last != (comma == std::string_view::npos)) return false;
        const auto field = line.substr(0, comma);
        double v = 0.0;
        const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
        if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) return false;
        out.push_back(v);
        if (!last) line.remove_prefix(comma + 1);
    }
    return true;
}

}  // namespace

bool serve_adapter_protocol(std::istream& in, std::ostream& out, std::ostream& err,
                            const ClassifierFamily& family) {
    std::string line;
    std::size_t n = 0, p = 0, q = 0;
    std::uint64_t seed = 0;
    {
        if (!std::getline(in, line)) {
            err << "missing TRAIN header\n";
            return false;
        }
        std::istringstream header(line);
        std::string tag;
        if (!(header >> tag >> n >> p >> seed) || tag != "TRAIN" || p == 0) {
            err << "malformed TRAIN header: " << line << '\n';
            return false;
        }
    }
    Dataset train(p);
    std::vector<double> row;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line) || !parse_row(line, p + 1, row) || (row.back() != 0.0 && row.back() != 1.0)) {
            err << "malformed training row " << i << '\n';
            return false;
        }
        const auto label = static_cast<std::uint8_t>(row.back());
        row.pop_back();
        train.add(row, label);
    }
    {
        if (!std::getline(in, line)) {
            err << "missing PREDICT header\n";
            return false;
        }
        std::istringstream header(line);
        std::string tag;
        if (!(header >> tag >> q) || tag != "PREDICT") {
            err << "malformed PREDICT header: " << line << '\n';
            return false;
        }
    }
    Dataset query(p);
    for (std::size_t i = 0; i < q; ++i) {
        if (!std::getline(in, line) || !parse_row(line, p, row)) {
            err << "malformed query row " << i << '\n';
            return false;
        }
        query.add(row, 0);
    }
    try {
        const auto model = fit_erm(family, train, seed);
        std::string reply;
        reply.reserve(2 * q + 3);
        for (std::uint8_t y : model->predict_all(query)) reply += y ? "1\n" : "0\n";
        reply += "OK\n";
        out << reply << std::flush;
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return false;
    }
    return true;
}

}  // namespace vcprobe
