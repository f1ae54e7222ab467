"""
The command line
================

``eventgne`` wraps the library in four subcommands: ``synth`` writes a
scene, ``segment`` solves it, ``verify`` re-checks a result file and
``render`` redraws the images. Every run leaves a ``manifest.ini`` that
reproduces it.
"""

import os
import subprocess
import sys
import tempfile

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="eventgne_")


def eventgne(*args):
    cmd = [sys.executable, "-m", "eventgne", *map(str, args)]
    print("$ eventgne", " ".join(map(str, args)))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    print(proc.stdout + proc.stderr, end="")
    print(f"(exit {proc.returncode})\n")
    return proc.returncode


scene, seg = os.path.join(out, "scene"), os.path.join(out, "seg")

############################################################
# A random two-object scene, then a two-player segmentation.

eventgne("synth", "--scene", "random", "--objects", 2, "--seed", 7, "--out", scene)
eventgne("segment", "--events", os.path.join(scene, "events.csv"), "--grid", "96,72",
         "--players", 2, "--out", seg)

############################################################
# The manifest records every setting plus a short report.

with open(os.path.join(seg, "manifest.ini")) as fh:
    print(fh.read())

############################################################
# Re-check the result, then rerun from the manifest alone.

eventgne("verify", "--result", os.path.join(seg, "result.json"), "--events", os.path.join(seg, "events.csv"))
eventgne("segment", "--config", os.path.join(seg, "manifest.ini"), "--out", seg + "_again")
same = all(
    open(os.path.join(seg, f), "rb").read() == open(os.path.join(seg + "_again", f), "rb").read()
    for f in os.listdir(seg)
)
print("rerun byte-identical:", same)
