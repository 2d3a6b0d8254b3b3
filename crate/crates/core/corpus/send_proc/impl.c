/* send_proc -- IPC */
int send_proc(pid_t pid, uint64_t val)
{
    struct proc *receiver;

    if (!is_pid_valid(pid))
        return -ESRCH;
    receiver = get_proc(pid);
    if (receiver->state != PROC_SLEEPING)
        return -EAGAIN;
    if (receiver->ipc_from != 0 && receiver->ipc_from != current)
        return -EACCES;
    receiver->ipc_val = val;
    receiver->ipc_from = current;
    receiver->state = PROC_RUNNABLE;
    proc_ready_add(receiver);
    return 0;
}
