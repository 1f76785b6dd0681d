#pragma once
// External policy scorer speaking line-delimited JSON over a local TCP
// socket. One request per scored step:
//   {"kind","target","history","initial_state","hypothesis","candidate"}
// answered by {"probability": p}. This is the seam where a hosted language
// model can stand in for the built-in oracle without entering this codebase.

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <string>

#include "mentis/inference.hpp"

namespace mentis {

struct ScorerUnavailable : std::runtime_error {
    explicit ScorerUnavailable(const std::string& what) : std::runtime_error(what) {}
};

inline json fused_step_to_json(const Apartment& apt, const FusedStep& s) {
    json j;
    j["index"] = s.index;
    j["agent"] = s.agent;
    j["action"] = s.action.has_value() ? action_to_json(apt, *s.action) : json(nullptr);
    j["utterance"] = utterance_to_json(apt, s.utterance);
    return j;
}

inline json fused_context_to_json(const Apartment& apt, const FusedContext& ctx,
                                  std::size_t history_len) {
    json placements = json::object();
    for (const auto& [obj, furn] : ctx.initial_placements) {
        placements[apt.vocabulary[obj]] = apt.furniture[furn].id;
    }
    json history = json::array();
    for (std::size_t i = 0; i < history_len && i < ctx.merged_steps.size(); ++i) {
        history.push_back(fused_step_to_json(apt, ctx.merged_steps[i]));
    }
    return {{"initial_state",
             {{"placements", placements},
              {"rooms", {apt.rooms[ctx.initial_rooms[0]], apt.rooms[ctx.initial_rooms[1]]}},
              {"names", {ctx.names[0], ctx.names[1]}}}},
            {"history", history}};
}

class ExternalScorer : public PolicyScorer {
public:
    // endpoint: "host:port"
    ExternalScorer(const Apartment& apt, std::string endpoint)
        : apt_(apt), endpoint_(std::move(endpoint)) {}

    ~ExternalScorer() override {
        if (fd_ >= 0) ::close(fd_);
    }

    double score_action(const FusedContext& ctx, std::size_t index, const Hypothesis& h,
                        AgentId target) override {
        const FusedStep& step = ctx.merged_steps[index];
        if (step.agent != target || !step.action.has_value()) return 1.0;
        return request("action", ctx, index, h, target, action_to_json(apt_, *step.action));
    }

    double score_utterance(const FusedContext& ctx, std::size_t index, const Hypothesis& h,
                           AgentId target) override {
        const FusedStep& step = ctx.merged_steps[index];
        if (step.agent != target) return 1.0;
        return request("utterance", ctx, index, h, target,
                       utterance_to_json(apt_, step.utterance));
    }

private:
    double request(const char* kind, const FusedContext& ctx, std::size_t index,
                   const Hypothesis& h, AgentId target, json candidate) {
        json req = fused_context_to_json(apt_, ctx, index);
        req["kind"] = kind;
        req["target"] = target;
        req["hypothesis"] = hypothesis_to_json(apt_, h);
        req["candidate"] = std::move(candidate);
        std::string line = req.dump() + "\n";
        ensure_connected();
        if (!write_all(line)) {
            throw ScorerUnavailable("scorer connection lost while writing");
        }
        std::string response = read_line();
        json resp = json::parse(response, nullptr, false);
        if (resp.is_discarded() || !resp.contains("probability")) {
            throw ScorerUnavailable("scorer returned malformed response: " + response);
        }
        double p = resp.at("probability").get<double>();
        if (!(p > 0.0) || p > 1.0) p = std::min(std::max(p, 1e-12), 1.0);
        return p;
    }

    void ensure_connected() {
        if (fd_ >= 0) return;
        auto colon = endpoint_.rfind(':');
        if (colon == std::string::npos) {
            throw ScorerUnavailable("scorer endpoint must be host:port, got " + endpoint_);
        }
        std::string host = endpoint_.substr(0, colon);
        std::string port = endpoint_.substr(colon + 1);
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
            throw ScorerUnavailable("cannot resolve scorer endpoint " + endpoint_);
        }
        int fd = -1;
        for (addrinfo* it = res; it != nullptr; it = it->ai_next) {
            fd = ::socket(it->ai_family, it->ai_socktype, it->ai_protocol);
            if (fd < 0) continue;
            if (::connect(fd, it->ai_addr, it->ai_addrlen) == 0) break;
            ::close(fd);
            fd = -1;
        }
        ::freeaddrinfo(res);
        if (fd < 0) throw ScorerUnavailable("cannot connect to scorer at " + endpoint_);
        fd_ = fd;
    }

    bool write_all(const std::string& data) {
        std::size_t sent = 0;
        while (sent < data.size()) {
            ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
            if (n <= 0) return false;
            sent += static_cast<std::size_t>(n);
        }
        return true;
    }

    std::string read_line() {
        std::string line;
        char c;
        while (true) {
            ssize_t n = ::recv(fd_, &c, 1, 0);
            if (n <= 0) throw ScorerUnavailable("scorer connection closed mid-response");
            if (c == '\n') break;
            line += c;
            if (line.size() > 1 << 20) throw ScorerUnavailable("scorer response exceeds 1 MiB");
        }
        return line;
    }

    const Apartment& apt_;
    std::string endpoint_;
    int fd_ = -1;
};

}  // namespace mentis
