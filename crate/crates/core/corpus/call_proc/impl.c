/* call_proc -- IPC */
int call_proc(pid_t pid, uint64_t val)
{
    struct proc *receiver, *caller;

    if (!is_pid_valid(pid))
        return -ESRCH;
    if (pid == current)
        return -EINVAL;
    receiver = get_proc(pid);
    if (receiver->state != PROC_SLEEPING)
        return -EAGAIN;
    if (receiver->ipc_from != 0 && receiver->ipc_from != current)
        return -EACCES;
    receiver->ipc_val = val;
    receiver->ipc_from = current;
    receiver->state = PROC_RUNNABLE;
    caller = get_proc(current);
    if (caller->state != PROC_RUNNING)
        return -EBUSY;
    caller->ipc_from = pid;
    caller->state = PROC_SLEEPING;
    proc_ready_remove(caller);
    return 0;
}
