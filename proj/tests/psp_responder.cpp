// PSP/1 test child. Usage: psp_responder MODE [VALUE]
//   echo          payload unchanged
//   add V         payload + V
//   stage-add V   payload + V on stage 2 requests only
//   error         status "error" with a message
//   short         ok header, payload one value short, then stays alive
//   short-exit    ok header, payload one value short, then exits
//   wrong-id      echo with id + 1
//   bad-magic     echo framed with "XXXX"
//   exit          reads one request and exits without answering

#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "vesselforge/psp.hpp"

using namespace vesselforge;

namespace {

std::size_t read_stdin(std::uint8_t* buf, std::size_t n) {
  for (;;) {
    const ssize_t r = read(STDIN_FILENO, buf, n);
    if (r >= 0) return static_cast<std::size_t>(r);
    if (errno != EINTR) return 0;
  }
}

void write_stdout(const std::vector<std::uint8_t>& bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t w = write(STDOUT_FILENO, bytes.data() + done, bytes.size() - done);
    if (w <= 0) std::exit(3);
    done += static_cast<std::size_t>(w);
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: psp_responder MODE [VALUE]\n");
    return 1;
  }
  const std::string mode = argv[1];
  const float value = argc > 2 ? std::strtof(argv[2], nullptr) : 0.0f;

  try {
    for (;;) {
      auto req = read_request(read_stdin);
      if (!req) return 0;
      if (mode == "exit") return 0;

      PspResponse resp;
      resp.id = req->id;
      resp.payload = req->payload;
      if (mode == "add" || (mode == "stage-add" && req->stage == 2)) {
        for (float& v : resp.payload) v += value;
      } else if (mode == "error") {
        resp.ok = false;
        resp.message = "responder refused patch";
        resp.payload.clear();
      } else if (mode == "wrong-id") {
        resp.id = req->id + 1;
      }

      auto bytes = encode_response(resp);
      if (mode == "short" || mode == "short-exit") {
        bytes.resize(bytes.size() - sizeof(float));
        write_stdout(bytes);
        if (mode == "short-exit") return 0;
        for (;;) pause();
      }
      if (mode == "bad-magic") bytes[0] = bytes[1] = bytes[2] = bytes[3] = 'X';
      write_stdout(bytes);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "psp_responder: %s\n", e.what());
    return 2;
  }
}
