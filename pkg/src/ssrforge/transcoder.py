"""Optional shell adapter for container video decode/encode.

The core pipeline only ever touches PNG frame directories; turning an MP4
into such a directory (and back) is delegated to an external command-line
transcoder through configurable invocation templates. The library never links
codec code. The SSR_FORGE_TRANSCODER environment variable overrides the
explode template.
"""
from __future__ import annotations

import os
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path

TRANSCODER_ENV = "SSR_FORGE_TRANSCODER"

# Templates receive {input}, {output_dir} / {input_dir}, {output}, and {fps}.
DEFAULT_EXPLODE = "ffmpeg -y -loglevel error -i {input} -vf fps={fps} {output_dir}/frame_%06d.png"
DEFAULT_ASSEMBLE = "ffmpeg -y -loglevel error -framerate {fps} -i {input_dir}/frame_%06d.png {output}"


class TranscoderError(RuntimeError):
    """Transcoder invocation failed or produced no frames."""


@dataclass(frozen=True)
class Transcoder:
    """Shell-template wrapper around an external video transcoder."""

    explode_template: str = DEFAULT_EXPLODE
    assemble_template: str = DEFAULT_ASSEMBLE

    @classmethod
    def from_env(cls) -> "Transcoder":
        override = os.environ.get(TRANSCODER_ENV)
        if override:
            return cls(explode_template=override)
        return cls()

    def explode(self, video_path: str | Path, out_dir: str | Path, fps: float) -> Path:
        """Expand a container video into a PNG frame directory."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        self._run(
            self.explode_template.format(
                input=shlex.quote(str(video_path)),
                output_dir=shlex.quote(str(out_dir)),
                fps=fps,
            )
        )
        if not any(out_dir.glob("*.png")):
            raise TranscoderError(f"transcoder produced no frames in {out_dir}")
        return out_dir

    def assemble(self, frames_dir: str | Path, video_path: str | Path, fps: float) -> Path:
        """Reassemble a frame directory into a container video."""
        self._run(
            self.assemble_template.format(
                input_dir=shlex.quote(str(frames_dir)),
                output=shlex.quote(str(video_path)),
                fps=fps,
            )
        )
        return Path(video_path)

    @staticmethod
    def _run(command: str) -> None:
        result = subprocess.run(
            command, shell=True, capture_output=True, text=True
        )
        if result.returncode != 0:
            raise TranscoderError(
                f"transcoder command failed ({result.returncode}): {command}\n{result.stderr.strip()}"
            )
