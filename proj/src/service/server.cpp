#include "httplib.h"

#include "gamtalk/service/service.hpp"

namespace gamtalk::service {

struct HttpServer::Impl {
    httplib::Server server;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>())
{
    auto& server = impl_->server;
    auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
        const Response r = service.handle_with_timeout(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get(R"(/api/.*)", dispatch);
    server.Post(R"(/api/.*)", dispatch);
    server.Put(R"(/api/.*)", dispatch);
    server.Delete(R"(/api/.*)", dispatch);
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty())
            return;
        const nlohmann::ordered_json body{{"error", "NotFound"},
                                          {"message", "no route for " + req.method + " " + req.path},
                                          {"details", nlohmann::ordered_json::object()}};
        res.set_content(body.dump(), "application/json");
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port)
{
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port),
                    {{"host", host}, {"port", port}});
    return bound;
}

void HttpServer::run()
{
    if (!impl_->server.listen_after_bind())
        throw Error(ErrorCode::Io, "server stopped with an error");
}

void HttpServer::wait_until_ready()
{
    impl_->server.wait_until_ready();
}

void HttpServer::stop()
{
    impl_->server.stop();
}

void serve(Service& service, const std::string& host, int port)
{
    HttpServer server(service);
    server.bind(host, port);
    server.run();
}

} // namespace gamtalk::service
