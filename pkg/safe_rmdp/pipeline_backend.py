# Copyright 2022 OpenMined.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Backends which run the replications of an experiment."""

import abc
import multiprocessing as mp
import typing


class PipelineBackend(abc.ABC):
    """Interface of the backends executing the experiment harness."""

    @abc.abstractmethod
    def map(self, col, fn, stage_name: typing.Optional[str] = None):
        pass

    @abc.abstractmethod
    def flat_map(self, col, fn, stage_name: typing.Optional[str] = None):
        pass

    def to_list(self, col, stage_name: typing.Optional[str] = None) -> list:
        """Materializes the collection, preserving the input order."""
        return list(col)


class LocalBackend(PipelineBackend):
    """Runs everything lazily in the current process."""

    def map(self, col, fn, stage_name: typing.Optional[str] = None):
        return map(fn, col)

    def flat_map(self, col, fn, stage_name: typing.Optional[str] = None):
        return (x for el in col for x in fn(el))


# Functions are passed to the workers once, through the pool initializer.
_pool_current_func = None


def _pool_worker_init(func):
    global _pool_current_func
    _pool_current_func = func


def _pool_worker(row):
    return _pool_current_func(row)


class _LazyMultiProcIterator:

    def __init__(self, job: typing.Callable, job_inputs: typing.Iterable,
                 chunksize: int, n_jobs: typing.Optional[int], **pool_kwargs):
        """Utilizes `multiprocessing.Pool.map` for the execution of a
        function `job` on an iterable `job_inputs`.

        Args:
            job: the function to be called on each input. It must be
              picklable unless the pool forks.
            job_inputs: iterable containing all the inputs.
            chunksize: see multiprocessing.Pool.map.
            n_jobs: number of worker processes, None for the number of CPUs.
        """
        self.job = job
        self.chunksize = chunksize
        self.job_inputs = job_inputs
        self.n_jobs = n_jobs
        self.pool_kwargs = pool_kwargs
        self._outputs = None  # type: typing.Optional[list]

    def _trigger_iterations(self):
        """Runs the pool over all inputs; outputs keep the input order."""
        if self._outputs is None:
            with mp.Pool(self.n_jobs,
                         initializer=_pool_worker_init,
                         initargs=(self.job,),
                         **self.pool_kwargs) as pool:
                self._outputs = pool.map(_pool_worker, list(self.job_inputs),
                                         self.chunksize)

    def __iter__(self):
        self._trigger_iterations()
        yield from self._outputs


class MultiProcLocalBackend(PipelineBackend):
    """Runs map stages on a pool of worker processes."""

    def __init__(self,
                 n_jobs: typing.Optional[int] = None,
                 chunksize: int = 1,
                 **pool_kwargs):
        if n_jobs is not None and n_jobs < 1:
            raise ValueError(
                f"MultiProcLocalBackend: n_jobs must be positive, "
                f"not {n_jobs}.")
        self.n_jobs = n_jobs
        self.chunksize = chunksize
        self.pool_kwargs = pool_kwargs

    def map(self, col, fn, stage_name: typing.Optional[str] = None):
        return _LazyMultiProcIterator(job=fn,
                                      job_inputs=col,
                                      n_jobs=self.n_jobs,
                                      chunksize=self.chunksize,
                                      **self.pool_kwargs)

    def flat_map(self, col, fn, stage_name: typing.Optional[str] = None):
        return (e for x in self.map(col, fn, stage_name) for e in x)


def make_backend(jobs: int) -> PipelineBackend:
    """LocalBackend for 1 job, MultiProcLocalBackend with jobs workers
    otherwise."""
    if jobs < 1:
        raise ValueError(f"jobs must be at least 1, not {jobs}.")
    if jobs == 1:
        return LocalBackend()
    return MultiProcLocalBackend(n_jobs=jobs)
